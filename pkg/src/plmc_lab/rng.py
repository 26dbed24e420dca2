"""Seeded, splittable random streams.

A stream is identified by ``(seed, replica_id, role)`` and backed by the
counter-based Philox4x64-10 bit generator keyed through ``SeedSequence``.
Gaussian variates come from ``Generator.standard_normal`` (ziggurat), which
consumes the stream sequentially, so drawing a block in several chunks gives
the same numbers as drawing it at once.
"""

from __future__ import annotations

import numpy as np

ROLE_BROWNIAN = 0
ROLE_ORACLE = 1
ROLE_PROJECTIONS = 2
ROLE_WARMSTART = 3
ROLE_MONTE_CARLO = 4

GENERATOR_ID = "numpy.random.Philox(SeedSequence(seed, spawn_key=(replica, role)))/standard_normal"


def stream(seed: int, replica_id: int = 0, role: int = ROLE_BROWNIAN) -> np.random.Generator:
    if seed < 0 or replica_id < 0:
        raise ValueError("seed and replica_id must be nonnegative")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(replica_id), int(role)))
    return np.random.Generator(np.random.Philox(ss))


def metadata(seed: int) -> dict:
    return {"generator": GENERATOR_ID, "numpy": np.__version__, "seed": int(seed)}
