import math
from fractions import Fraction

import numpy as np
import pytest

from distal_lab import cocycle as cocyclemod
from distal_lab import flows, presets, torus


@pytest.fixture(scope="session")
def golden():
    return torus.named_angle("golden")


@pytest.fixture(scope="session")
def sqrt2m1():
    return torus.named_angle("sqrt2-1")


@pytest.fixture(scope="session")
def sqrt3m1():
    return torus.named_angle("sqrt3-1")


@pytest.fixture(scope="session")
def liou4():
    return torus.liouville_angle(4)


@pytest.fixture(scope="session")
def scan_flow(liou4):
    return flows.SkewFlow(angle=liou4, cocycle=presets.scan_cocycle(liou4))


@pytest.fixture(scope="session")
def scan_scales(scan_flow):
    return presets.default_scales(scan_flow.angle, scan_flow.cocycle)


def mpmath_cf_oracle(decimal: str, k: int) -> list:
    """Independent continued-fraction expansion through mpmath floor/recip."""
    from mpmath import mp, mpf

    with mp.workdps(len(decimal) + 10):
        x = mpf(decimal)
        out = []
        for _ in range(k):
            a = int(mp.floor(x))
            out.append(a)
            x = x - a
            if x == 0:
                break
            x = 1 / x
        return out


def brute_force_min_invariant_equivalence(rel):
    """Enumerative oracle: grow the pair set until it is an invariant
    equivalence relation (differs from the union-find oracle in presets)."""
    n = rel.carrier.n
    pairs = set(rel.pairs)
    pairs |= {(i, i) for i in range(n)}
    changed = True
    while changed:
        changed = False
        new = set()
        for (a, b) in pairs:
            new.add((b, a))
            for g in rel.carrier.generators:
                new.add((g[a], g[b]))
        for (a, b) in pairs:
            for (c, d) in pairs:
                if b == c:
                    new.add((a, d))
        if not new <= pairs:
            pairs |= new
            changed = True
    return frozenset(pairs)
