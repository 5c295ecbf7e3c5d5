"""
Seed derivation and counter-based random streams.

Every random draw in HeteroLab comes from a Philox generator keyed by a
hash of (seed, labels...). Streams never depend on how many draws another
stream made, so adding a head or reordering jobs leaves other draws intact.
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(seed, *labels):
    """Hash a seed and a path of labels into a 64-bit integer"""
    digest = hashlib.blake2b(digest_size=8)
    digest.update(str(int(seed) & _MASK64).encode())
    for label in labels:
        digest.update(b'/')
        digest.update(str(label).encode())
    return int.from_bytes(digest.digest(), 'little')


def counter_rng(seed, *labels):
    """Philox generator for the stream named by (seed, labels)"""
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, *labels)))


def bitwise_equal(a, b):
    """True when two arrays have identical shape, dtype and bytes"""
    a = np.asarray(a)
    b = np.asarray(b)
    return a.shape == b.shape and a.dtype == b.dtype and a.tobytes() == b.tobytes()


def max_ulp_distance(a, b):
    """Largest distance in units of least precision between two float64 arrays"""
    a = np.ascontiguousarray(a, dtype=np.float64).view(np.int64)
    b = np.ascontiguousarray(b, dtype=np.float64).view(np.int64)
    # Map the sign-magnitude layout onto a monotone integer line
    a = np.where(a < 0, np.int64(-(2 ** 63)) - a, a)
    b = np.where(b < 0, np.int64(-(2 ** 63)) - b, b)
    if a.size == 0:
        return 0
    return int(np.max(np.abs(a.astype(object) - b.astype(object))))
