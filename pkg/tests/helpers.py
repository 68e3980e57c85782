import math

import numpy as np

from spinlab.qstate import Direction, TwoQubitKet


def random_axes(seed, count):
    r = np.random.default_rng(seed)
    return [Direction(math.acos(2 * u - 1), 2 * math.pi * v) for u, v in r.random((count, 2))]


def random_kets(seed, count):
    r = np.random.default_rng(seed)
    return [TwoQubitKet.normalized(r.normal(size=4) + 1j * r.normal(size=4))
            for _ in range(count)]
