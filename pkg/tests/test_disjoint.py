from fractions import Fraction

import pytest

from distal_lab import disjoint, torus
from distal_lab.disjoint import (cross_validate, extend_independent_family,
                                 integer_relation, rotation_family_verdict)
from distal_lab.errors import DistalLabError, PrecisionError


def _same_relation(coeffs, expected):
    c = tuple(coeffs)
    e = tuple(expected)
    return c == e or c == tuple(-v for v in e)


def test_half_relation():
    v = integer_relation([Fraction(1), Fraction(1, 2)], max_coeff=100, digits=50)
    assert v.dependent
    assert _same_relation(v.certificate.coeffs, (1, -2))


def test_sqrt8_relation():
    from mpmath import mp, mpf, sqrt
    with mp.workdps(140):
        xs = [str(mpf(1)), mp.nstr(sqrt(2), 130), mp.nstr(sqrt(8), 130)]
    v = integer_relation(xs, max_coeff=10 ** 6, digits=120)
    assert v.dependent
    assert _same_relation(v.certificate.coeffs, (0, 2, -1))


def test_surd_triple_independent():
    from mpmath import mp, sqrt
    with mp.workdps(140):
        xs = ["1", mp.nstr(sqrt(2), 130), mp.nstr(sqrt(3), 130)]
    v = integer_relation(xs, max_coeff=10 ** 6, digits=120)
    assert v.status == "independent_up_to"
    assert v.max_coeff == 10 ** 6 and v.digits == 120


def test_precision_preconditions():
    with pytest.raises(PrecisionError):
        integer_relation([Fraction(1), Fraction(1, 3)], digits=20)
    with pytest.raises(DistalLabError):
        integer_relation([Fraction(1)])


def test_certificate_reverifies_at_double_precision(sqrt2m1):
    d = torus.doubled_angle(sqrt2m1)
    v = rotation_family_verdict([sqrt2m1, d])
    assert v.dependent
    assert v.certificate.residual < 10.0 ** (-v.digits / 2)
    assert _same_relation(v.certificate.coeffs, (0, 2, -1))


def test_singleton_families(golden):
    assert not rotation_family_verdict([golden]).dependent
    assert not rotation_family_verdict([], real_frequencies=[Fraction(3, 7)]).dependent


def test_independent_pair_and_subsets(sqrt2m1, sqrt3m1):
    sqrt5m2 = torus.named_angle("sqrt5-2")
    triple = rotation_family_verdict([sqrt2m1, sqrt3m1, sqrt5m2], max_coeff=10 ** 4)
    assert not triple.dependent
    # monotone under subsets at the same bounds
    for pair in ([sqrt2m1, sqrt3m1], [sqrt2m1, sqrt5m2], [sqrt3m1, sqrt5m2]):
        assert not rotation_family_verdict(pair, max_coeff=10 ** 4).dependent


def test_real_frequency_mode():
    omega = torus.named_angle("sqrt2-1").model
    dep = rotation_family_verdict([], real_frequencies=[2 * omega, 3 * omega])
    assert dep.dependent
    assert _same_relation(dep.certificate.coeffs, (3, -2))
    indep = rotation_family_verdict(
        [], real_frequencies=[omega, torus.named_angle("sqrt3-1").model])
    assert not indep.dependent


def test_extend_family_greedy(sqrt2m1, sqrt3m1):
    d = torus.doubled_angle(sqrt2m1)
    out = extend_independent_family([sqrt2m1], [d, sqrt3m1])
    assert len(out) == 2
    assert out[0] is sqrt2m1 and out[1] is sqrt3m1
    assert not rotation_family_verdict(out).dependent


def test_extend_family_noop(golden):
    assert extend_independent_family([golden], []) == [golden]
    assert extend_independent_family([], [golden]) == [golden]


def test_cross_validate_dependent_pair(sqrt2m1):
    d = torus.doubled_angle(sqrt2m1)
    cv = cross_validate([sqrt2m1, d], n=10 ** 6, m=32)
    assert cv.verdict.dependent
    assert cv.coverage <= 0.12
    assert cv.agree


def test_cross_validate_singleton(golden):
    cv = cross_validate([golden], n=10 ** 5, m=100)
    assert not cv.verdict.dependent
    assert cv.coverage == 1.0
    assert cv.agree


def test_cross_validate_size_cap(golden):
    with pytest.raises(DistalLabError):
        cross_validate([golden] * 5, n=100, m=4)
