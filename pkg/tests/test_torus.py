import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distal_lab import torus
from distal_lab.errors import DistalLabError, PrecisionError, RationalAngleError
from distal_lab.torus import FRAC_MOD, Frac128, TorusPoint, frac_add

from conftest import mpmath_cf_oracle

raws = st.integers(min_value=0, max_value=FRAC_MOD - 1)


def test_frac_add_wraparound():
    a = Frac128.from_fraction(Fraction(1, 4))
    b = Frac128.from_fraction(Fraction(7, 8))
    assert frac_add(a, b) == Frac128.from_fraction(Fraction(1, 8))


def test_frac_add_identity_and_inverse():
    x = Frac128.from_fraction(Fraction(3, 7))
    assert frac_add(x, Frac128(0)) == x
    assert frac_add(x, -x) == Frac128(0)


@given(raws, raws, raws)
def test_frac_add_group_laws(a, b, c):
    x, y, z = Frac128(a), Frac128(b), Frac128(c)
    assert (x + y) + z == x + (y + z)
    assert x + y == y + x
    assert (x + y) - y == x


@given(raws)
def test_hex_round_trip(a):
    x = Frac128(a)
    assert Frac128.from_hex(x.to_hex()) == x


@given(raws, st.integers(min_value=0, max_value=10 ** 9))
@settings(max_examples=30)
def test_iterated_add_equals_scalar_multiple(a, n):
    """n steps of +alpha land exactly on the integer multiple, any n <= 1e9."""
    alpha = Frac128(a)
    # closed form on raw words
    expected = Frac128((a * n) % FRAC_MOD)
    # iterate in exponentially growing blocks to keep the check cheap but exact
    acc = Frac128(0)
    remaining = n
    block = alpha
    size = 1
    while remaining:
        if remaining & 1:
            acc = acc + block
        block = block + block
        remaining >>= 1
    assert acc == expected


def test_torus_point_basics():
    p = TorusPoint.from_floats([0.25, 0.75])
    assert p.dim == 2
    assert p.distance(p) == 0
    q = TorusPoint.from_floats([0.20, 0.80])
    assert math.isclose(float(p.distance(q)), 0.05, rel_tol=1e-9)
    with pytest.raises(DistalLabError):
        TorusPoint(())


# ---------------------------------------------------------------------------
# continued fractions
# ---------------------------------------------------------------------------

def test_golden_expansion(golden):
    assert golden.cf[:10] == (0, 1, 1, 1, 1, 1, 1, 1, 1, 1)
    assert [q for _p, q in golden.convergents[:10]] == [1, 1, 2, 3, 5, 8, 13, 21, 34, 55]


def test_cf_matches_mpmath_oracle(sqrt2m1):
    oracle = mpmath_cf_oracle(sqrt2m1.decimal, len(sqrt2m1.cf))
    assert list(sqrt2m1.cf) == oracle[:len(sqrt2m1.cf)]


def test_rational_angle_rejected():
    with pytest.raises(RationalAngleError):
        torus.continued_fraction("0." + "5" + "0" * 39, 4)


def test_short_decimal_rejected():
    with pytest.raises(DistalLabError):
        torus.continued_fraction("0.61803398874989", 4)


def test_precision_exhaustion():
    # a 40-digit angle cannot certify 200 quotients
    angle = torus.named_angle("sqrt2-1")
    with pytest.raises(PrecisionError):
        torus.continued_fraction(angle.decimal, 200)


@pytest.mark.parametrize("name", ["golden", "sqrt2-1", "sqrt3-1", "sqrt5-2"])
def test_convergent_ladder_invariants(name):
    a = torus.named_angle(name)
    conv = a.convergents
    for k in range(1, len(conv)):
        p, q = conv[k]
        pp, qp = conv[k - 1]
        assert q * pp - p * qp in (1, -1)
        if k >= 2:
            assert q > conv[k - 1][1]
    for k in range(len(conv) - 1):
        _p, q = conv[k]
        qn = conv[k + 1][1]
        assert a.approx_dist(q) < Fraction(1, qn)


# ---------------------------------------------------------------------------
# series-defined angles
# ---------------------------------------------------------------------------

def test_liouville3_value():
    a = torus.liouville_angle(3)
    assert a.decimal.startswith("0.110001")
    assert [q for _p, q in a.convergents] == [1, 9, 100, 9909, 10009, 109999, 1000000]


def test_liouville2_is_rational():
    with pytest.raises(RationalAngleError):
        torus.liouville_angle(2)


def test_liouville_terms_bounds():
    with pytest.raises(PrecisionError):
        torus.liouville_angle(7)
    with pytest.raises(PrecisionError):
        torus.liouville_angle(1)


def test_liouville4_ladder(liou4):
    qs = [q for _p, q in liou4.convergents]
    assert qs[:7] == [1, 9, 100, 9909, 10009, 109999, 1000000]
    assert qs[-1] == 10 ** 24
    # scale collapse of the approximation errors at the jump denominators
    assert float(liou4.approx_dist(100)) == pytest.approx(1e-4, rel=1e-15)
    assert float(liou4.approx_dist(10 ** 6)) == pytest.approx(1e-18, rel=1e-15)
    assert float(liou4.approx_dist(10 ** 24)) == pytest.approx(1e-96, rel=1e-15)


def test_liouville4_tail_scale_jumps(liou4):
    # q_k >= 10^(k! - (k-1)!) * q_(k-1) at the factorial scales
    qs = [q for _p, q in liou4.convergents]
    assert 10 ** 6 in qs and 10 ** 24 in qs
    assert 10 ** 24 >= 10 ** (24 - 6) * 10 ** 6


def test_best_approx_errors(liou4):
    errs = liou4.best_approx_errors()
    for e, (_p, q) in zip(errs, liou4.convergents):
        assert e.q == q
        assert e.dist == pytest.approx(float(liou4.approx_dist(q)), rel=1e-12)
    # dist <= 1/q_{k+1}
    qs = [q for _p, q in liou4.convergents]
    for k in range(len(qs) - 1):
        assert errs[k].dist <= 1.0 / qs[k + 1] * (1 + 1e-12)


def test_sparse_power_angle_ladder():
    b3 = torus.sparse_power_angle(3, (1, 2, 11, 26, 54))
    qs = [q for _p, q in b3.convergents]
    assert qs[0] == 1 and qs[-1] <= 3 ** 54
    for k in range(1, len(qs) - 1):
        assert float(b3.approx_dist(qs[k])) < 1.0 / qs[k + 1] * (1 + 1e-12)


def test_angle_json_round_trip(sqrt2m1):
    data = sqrt2m1.to_json()
    assert set(data) == {"decimal", "cf", "convergents"}
    back = torus.RotationAngle.from_json(data)
    assert back.cf == sqrt2m1.cf
    assert back.frac == sqrt2m1.frac
    assert back.convergents == sqrt2m1.convergents


def test_doubled_angle(sqrt2m1):
    d = torus.doubled_angle(sqrt2m1)
    assert abs(float(d.model) - 2 * float(sqrt2m1.model)) < 1e-30


def test_quantization_error_budget(golden):
    # one-time rounding to the lattice moves the angle by < 2^-128
    err = abs(golden.model - golden.frac.to_fraction())
    assert err < Fraction(1, 2 ** 128)
