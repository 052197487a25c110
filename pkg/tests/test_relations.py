import numpy as np
import pytest

from distal_lab import presets, relations
from distal_lab.errors import DistalLabError
from distal_lab.flows import ProductFlow, RotationFlow
from distal_lab.relations import (FiniteCarrier, FiniteRelation, factor_closure,
                                  parse_relation_text, product_closure_check, rp_probe)
from distal_lab.torus import Frac128, TorusPoint

from conftest import brute_force_min_invariant_equivalence


def test_transitive_closure_no_group():
    rel = FiniteRelation(FiniteCarrier(4), frozenset({(1, 2), (2, 3)}))
    classes = sorted(tuple(sorted(c)) for c in factor_closure(rel).classes())
    assert classes == [(0,), (1, 2, 3)]


def test_closure_with_generator_symmetry():
    car = FiniteCarrier(4, ((1, 0, 3, 2),))
    rel = FiniteRelation(car, frozenset({(0, 2)}))
    classes = sorted(tuple(sorted(c)) for c in factor_closure(rel).classes())
    assert classes == [(0, 2), (1, 3)]


def test_closure_fixes_diagonal():
    rel = FiniteRelation(FiniteCarrier(5), frozenset((i, i) for i in range(5)))
    closed = factor_closure(rel)
    assert closed.pairs == frozenset((i, i) for i in range(5))


def test_closure_idempotent_and_monotone():
    rng = np.random.default_rng(11)
    for _ in range(50):
        rel = presets._random_relation(rng, n_max=6)
        closed = factor_closure(rel)
        assert factor_closure(closed).pairs == closed.pairs
        bigger = FiniteRelation(rel.carrier, rel.pairs | {(0, rel.carrier.n - 1)})
        assert closed.pairs <= factor_closure(bigger).pairs


def test_closure_matches_both_oracles():
    rng = np.random.default_rng(12)
    for _ in range(100):
        rel = presets._random_relation(rng, n_max=7)
        got = factor_closure(rel).pairs
        assert got == presets.closure_oracle(rel).pairs
        assert got == brute_force_min_invariant_equivalence(rel)


def test_generator_validation():
    with pytest.raises(DistalLabError):
        FiniteCarrier(3, ((0, 0, 1),))


def test_product_check_full_relations():
    full = frozenset((i, j) for i in range(2) for j in range(2))
    rels = [FiniteRelation(FiniteCarrier(2), full) for _ in range(2)]
    rep = product_closure_check(rels)
    assert rep.passed
    assert [t.subset for t in rep.trace] == [(0,), (0, 1)]


def test_product_check_single_carrier_tautology():
    rel = FiniteRelation(FiniteCarrier(3), frozenset({(0, 1)}))
    assert product_closure_check([rel]).passed


def test_product_check_random_instances():
    rng = np.random.default_rng(13)
    for _ in range(30):
        rels = []
        for _i in range(2):
            pairs = frozenset((int(rng.integers(0, 3)), int(rng.integers(0, 3)))
                              for _ in range(int(rng.integers(0, 5))))
            rels.append(FiniteRelation(FiniteCarrier(3), pairs))
        assert product_closure_check(rels).passed


def test_product_check_size_cap():
    rel = FiniteRelation(FiniteCarrier(7), frozenset())
    with pytest.raises(DistalLabError):
        product_closure_check([rel])


def test_relation_text_format():
    text = """3 1
1 2 0
pairs:
0 1
"""
    rel = parse_relation_text(text)
    assert rel.carrier.n == 3
    assert rel.carrier.generators == ((1, 2, 0),)
    assert rel.pairs == frozenset({(0, 1)})
    classes = sorted(tuple(sorted(c)) for c in factor_closure(rel).classes())
    assert classes == [(0, 1, 2)]


# ---------------------------------------------------------------------------
# regional proximality probe
# ---------------------------------------------------------------------------

def test_rotation_pairs_refuted(golden):
    flow = RotationFlow(golden)
    x = TorusPoint((Frac128.from_float(0.1),))
    xp = TorusPoint((Frac128.from_float(0.4),))
    rep = rp_probe(flow, x, xp, eps=0.1, delta=0.025, t_max=100)
    assert rep.status == "refuted-by-isometry"


def test_rotation_pair_within_reach_is_positive(golden):
    flow = RotationFlow(golden)
    x = TorusPoint((Frac128.from_float(0.1),))
    xp = TorusPoint((Frac128.from_float(0.102),))
    rep = rp_probe(flow, x, xp, eps=0.01, delta=0.005, t_max=10)
    assert rep.positive and rep.witness_time == 0


def test_skew_distinct_base_refuted(scan_flow):
    rng = np.random.default_rng(14)
    for _ in range(20):
        a, b = (Frac128(int.from_bytes(rng.bytes(16), "big")) for _ in range(2))
        if float(a.distance(b)) <= 0.03:
            continue
        rep = rp_probe(scan_flow,
                       TorusPoint((a, Frac128(int.from_bytes(rng.bytes(16), "big")))),
                       TorusPoint((b, Frac128(int.from_bytes(rng.bytes(16), "big")))),
                       eps=0.02, delta=0.005, t_max=500)
        assert rep.status == "refuted-by-isometry"


def test_skew_same_base_positive(scan_flow):
    s = Frac128.from_float(0.3)
    rep = rp_probe(scan_flow, TorusPoint((s, Frac128.from_float(0.1))),
                   TorusPoint((s, Frac128.from_float(0.6))),
                   eps=0.02, delta=0.005, t_max=25000)
    assert rep.positive
    assert rep.witness_time is not None and rep.witness_time <= 25000


def test_product_base_separation_refutes(scan_flow, golden):
    flow = ProductFlow((RotationFlow(golden), scan_flow))
    x = TorusPoint((Frac128.from_float(0.1), Frac128.from_float(0.2), Frac128(0)))
    xp = TorusPoint((Frac128.from_float(0.6), Frac128.from_float(0.2), Frac128(0)))
    rep = rp_probe(flow, x, xp, eps=0.02, delta=0.005, t_max=100)
    assert rep.status == "refuted-by-isometry"


def test_product_single_fiber_separation_searches(scan_flow, golden):
    flow = ProductFlow((RotationFlow(golden), scan_flow))
    s = Frac128.from_float(0.3)
    x = TorusPoint((Frac128.from_float(0.1), s, Frac128.from_float(0.1)))
    xp = TorusPoint((Frac128.from_float(0.1), s, Frac128.from_float(0.6)))
    rep = rp_probe(flow, x, xp, eps=0.02, delta=0.005, t_max=25000)
    assert rep.positive


def test_probe_rejects_bad_parameters(scan_flow):
    x = TorusPoint.zero(2)
    with pytest.raises(DistalLabError):
        rp_probe(scan_flow, x, x, eps=0.0, delta=0.1, t_max=10)
