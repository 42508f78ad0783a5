"""Labelled, splittable random streams.

Every random draw in the package comes from ``stream(seed, label, *index)``.
The root seed and the label (plus optional integer indices such as a
replication number) are hashed into a :class:`numpy.random.SeedSequence`
spawn key, and the stream itself is a PCG64 generator.  Identical
``(seed, label, index)`` triples always give identical draws.

Labels used by the package:

``"correlation"``   random correlation matrix of a simulated market
``"student"``       normal / chi-square draws of a simulated market
``"perturb"``       entry selection and magnitudes, indexed by replication
``"multistart"``    extra random starting points, indexed by grid point
"""

import zlib

import numpy as np

ALGORITHM = "numpy PCG64 seeded by SeedSequence(seed, spawn_key=(crc32(label), *index))"

U64_MAX = 2**64 - 1


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed <= U64_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def stream(seed, label, *index):
    key = (zlib.crc32(label.encode("utf-8")),) + tuple(int(i) for i in index)
    ss = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))
