"""Named random streams derived from one master seed.

Streams use a counter-based generator (Philox, 4x64 with a 2-word key) so they
are splittable by construction: the key is (master_seed, first 8 bytes of
sha256(stream_name)), which makes every stream a pure function of the seed and
its name, independent of creation order and cheap to rebuild anywhere. The
algorithm name and the numpy version are recorded in run metadata so artifacts
stay attributable across platforms.
"""

import hashlib

import numpy as np
from numpy.random import Generator, Philox

MASK64 = (1 << 64) - 1

STREAM_NAMES = ("env", "actor-init", "critic-init", "sampling", "replay")


def named_stream(master_seed, name):
    """Generator for one (seed, name) pair; same pair, same sequence, always."""
    sub = int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:8], "little")
    key = np.array([int(master_seed) & MASK64, sub], dtype=np.uint64)
    return Generator(Philox(key=key))


def derive_rng_streams(master_seed):
    """The five streams the training harness uses, keyed by purpose.

    env: environment resets and transition sampling
    actor-init / critic-init: weight initialization
    sampling: action selection (exploration and categorical draws)
    replay: minibatch index draws
    """
    return {name: named_stream(master_seed, name) for name in STREAM_NAMES}


def rng_metadata():
    return {
        "algorithm": "philox4x64",
        "key_derivation": "key = (master_seed mod 2^64, sha256(stream_name)[:8] little-endian)",
        "numpy_version": np.__version__,
    }
