"""Integer activation codes shared by every backend.

Kernels take the activation as a plain int so the jitted versions stay
monomorphic.
"""

ACT_LINEAR = 0
ACT_TANH = 1
ACT_RELU = 2
ACT_SOFTMAX = 3

ACT_CODE = {
    "linear": ACT_LINEAR,
    "tanh": ACT_TANH,
    "relu": ACT_RELU,
    "softmax": ACT_SOFTMAX,
}

ACT_NAME = {code: name for name, code in ACT_CODE.items()}
