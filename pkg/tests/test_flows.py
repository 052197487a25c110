import math
from fractions import Fraction

import numpy as np
import pytest

from distal_lab import cocycle as cocyclemod
from distal_lab import flows, torus
from distal_lab.errors import DimensionMismatchError, DistalLabError
from distal_lab.flows import (OrbitStream, ProductFlow, RotationFlow, SampledRFlow,
                              SkewFlow, density_probe, step, time_change)
from distal_lab.torus import Frac128, TorusPoint


def test_rotation_step_from_zero(golden):
    flow = RotationFlow(golden)
    out = step(flow, TorusPoint.zero(1))
    assert out.coords[0] == golden.frac


def test_trivial_cocycle_skew_fixes_fiber(liou4):
    cc = cocyclemod.build_cocycle(liou4, 0)
    flow = SkewFlow(angle=liou4, cocycle=cc)
    y = Frac128.from_float(0.3)
    out = step(flow, TorusPoint((Frac128(0), y)))
    assert out.coords[0] == liou4.frac
    assert out.coords[1] == y


def test_product_step_componentwise(golden, sqrt2m1):
    flow = ProductFlow((RotationFlow(golden), RotationFlow(sqrt2m1)))
    pt = TorusPoint.zero(2)
    for n in range(1, 20):
        pt = step(flow, pt)
        assert pt.coords[0] == golden.frac.scaled(n)
        assert pt.coords[1] == sqrt2m1.frac.scaled(n)


def test_dimension_mismatch(golden):
    with pytest.raises(DimensionMismatchError):
        step(RotationFlow(golden), TorusPoint.zero(2))


def test_rotation_steps_are_isometries(golden, sqrt2m1):
    flow = ProductFlow((RotationFlow(golden), RotationFlow(sqrt2m1)))
    rng = np.random.default_rng(1)
    for _ in range(50):
        p = TorusPoint(tuple(Frac128(int.from_bytes(rng.bytes(16), "big")) for _ in range(2)))
        q = TorusPoint(tuple(Frac128(int.from_bytes(rng.bytes(16), "big")) for _ in range(2)))
        assert step(flow, p).distance(step(flow, q)) == p.distance(q)


def test_skew_base_coordinate_is_isometric(scan_flow):
    rng = np.random.default_rng(2)
    for _ in range(25):
        p = TorusPoint(tuple(Frac128(int.from_bytes(rng.bytes(16), "big")) for _ in range(2)))
        q = TorusPoint(tuple(Frac128(int.from_bytes(rng.bytes(16), "big")) for _ in range(2)))
        dp, dq = step(scan_flow, p), step(scan_flow, q)
        assert dp.coords[0].distance(dq.coords[0]) == p.coords[0].distance(q.coords[0])


def test_orbit_stream_composition(scan_flow):
    s1 = OrbitStream(scan_flow, TorusPoint.zero(2))
    s1.advance(7)
    s2 = OrbitStream(scan_flow, TorusPoint.zero(2))
    for _ in range(7):
        s2.advance(1)
    assert s1.current == s2.current
    assert s1.step_index == 7


def test_product_projection_equals_factor_orbit(golden, sqrt2m1):
    flow = ProductFlow((RotationFlow(golden), RotationFlow(sqrt2m1)))
    joint = TorusPoint.zero(2)
    fac = TorusPoint.zero(1)
    for _ in range(200):
        joint = step(flow, joint)
        fac = step(RotationFlow(sqrt2m1), fac)
    assert joint.coords[1] == fac.coords[0]


# ---------------------------------------------------------------------------
# time changes
# ---------------------------------------------------------------------------

def test_time_change_identity(golden):
    base = SampledRFlow(rate=golden, dt=Fraction(1))
    assert time_change(base, 1).drift() == base.drift()


def test_time_change_composes_scalings(golden):
    base = SampledRFlow(rate=golden, dt=Fraction(1, 7))
    double = time_change(base, 2)
    assert double.effective_fraction() == (golden.model * Fraction(2, 7)) % 1
    assert time_change(double, 3).effective_fraction() == (golden.model * Fraction(6, 7)) % 1


def test_time_change_rejects_nonpositive(golden):
    base = SampledRFlow(rate=golden)
    with pytest.raises(DistalLabError):
        time_change(base, 0)
    with pytest.raises(DistalLabError):
        time_change(RotationFlow(golden), 2)


def test_time_change_preserves_empirical_measure(golden):
    from distal_lab.ergodic import empirical_measure

    base = SampledRFlow(rate=golden, dt=Fraction(1))
    fast = time_change(base, 3)
    x0 = TorusPoint.zero(1)
    n, m = 10 ** 6, 50
    em1 = empirical_measure(base, x0, n, m)
    em2 = empirical_measure(fast, x0, n, m)
    assert em1.sup_cell_gap(em2) < 0.01


# ---------------------------------------------------------------------------
# density probe
# ---------------------------------------------------------------------------

def test_density_probe_golden_covers(golden):
    rep = density_probe(RotationFlow(golden), TorusPoint.zero(1), 10 ** 5, 100)
    assert rep.coverage == 1.0
    assert rep.largest_empty_cluster == 0


def test_density_probe_monotone_in_n(golden, sqrt2m1):
    flow = ProductFlow((RotationFlow(golden), RotationFlow(sqrt2m1)))
    x0 = TorusPoint.zero(2)
    cov = [density_probe(flow, x0, n, 16).coverage for n in (50, 500, 5000, 50000)]
    assert all(a <= b for a, b in zip(cov, cov[1:]))
    assert cov[-1] == 1.0


def _line_coset_cells(m: int) -> int:
    """Cells of the m x m grid met by the line y = 2x mod 1 (oracle)."""
    cells = set()
    steps = 100000
    for i in range(steps):
        x = i / steps
        cells.add((int(x * m) % m, int((2 * x % 1.0) * m) % m))
    return len(cells)


def test_density_probe_line_coset(sqrt2m1):
    d = torus.doubled_angle(sqrt2m1)
    flow = ProductFlow((RotationFlow(sqrt2m1), RotationFlow(d)))
    rep = density_probe(flow, TorusPoint.zero(2), 10 ** 6, 32)
    oracle = _line_coset_cells(32)
    assert rep.visited <= oracle
    assert rep.coverage <= 3 * 32 / 32 ** 2
    assert rep.largest_empty_cluster > 0


def test_flow_json_round_trip(scan_flow, golden):
    data = scan_flow.to_json()
    back = flows.flow_from_json(data)
    assert back.cocycle.terms == scan_flow.cocycle.terms
    assert back.angle.frac == scan_flow.angle.frac
    prod = ProductFlow((RotationFlow(golden), scan_flow))
    back2 = flows.flow_from_json(prod.to_json())
    assert back2.dim == 3
