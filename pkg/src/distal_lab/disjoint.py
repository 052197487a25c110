"""Integer-relation detection and the independence criterion for rotation families.

A finite family of circle rotations has a minimal product flow exactly when
the frequency group generated by the angles is as free as it can be: no
nonzero integer vector c with c_0 + sum c_i alpha_i = 0 (discrete-time
rotations; the constant accounts for relations mod 1), respectively
sum c_i omega_i = 0 for sampled real flows, whose characters carry exact
frequencies.  Independence of reals is not decidable from finite data, so
verdicts are semi-decisions: dependence comes with a checkable certificate,
independence is always "up to a coefficient bound at a working precision".

The search engine is PSLQ (mpmath); every found relation is re-verified at
twice the working precision before it is accepted as a certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .errors import DistalLabError, PrecisionError
from .flows import ProductFlow, RotationFlow
from .torus import RotationAngle, TorusPoint

DEFAULT_MAX_COEFF = 10 ** 6
DEFAULT_DIGITS = 120


@dataclass(frozen=True)
class RelationCertificate:
    """A witness of rational dependence: |sum coeffs_i x_i| < 10^(-digits/2)."""

    coeffs: tuple[int, ...]
    residual: float
    digits: int


@dataclass(frozen=True)
class IndependenceVerdict:
    status: str  # "dependent" | "independent_up_to"
    certificate: RelationCertificate | None
    max_coeff: int
    digits: int

    @property
    def dependent(self) -> bool:
        return self.status == "dependent"

    def to_json(self) -> dict:
        out = {"status": self.status, "max_coeff": self.max_coeff, "digits": self.digits}
        if self.certificate is not None:
            out["certificate"] = {"coeffs": list(self.certificate.coeffs),
                                  "residual": self.certificate.residual}
        return out


def _to_mpf(x, dps: int):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, str):
        return mpmath.mpf(x)
    if isinstance(x, (int, float)):
        return mpmath.mpf(x)
    raise DistalLabError(f"cannot interpret {type(x).__name__} as a high-precision real")


def _verify(xs: Sequence, coeffs: Sequence[int], digits: int) -> float:
    """Residual |sum c_i x_i| recomputed at twice the working precision."""
    with mpmath.workdps(2 * digits):
        total = mpmath.mpf(0)
        for c, x in zip(coeffs, xs):
            total += c * _to_mpf(x, 2 * digits)
        return float(abs(total))


def integer_relation(xs: Sequence, max_coeff: int = DEFAULT_MAX_COEFF,
                     digits: int = DEFAULT_DIGITS) -> IndependenceVerdict:
    """Search for a nonzero integer vector c with sum c_i x_i = 0.

    Inputs should be exact (Fraction or decimal string); floats are accepted
    but limit the meaningful precision.  A returned dependence always carries
    a certificate that re-verified at 2x precision; failure to re-verify is
    reported as a precision error, never as a silent verdict.
    """
    if not 2 <= len(xs) <= 12:
        raise DistalLabError("integer_relation supports 2 to 12 inputs")
    if digits < 10 * len(xs) + 20:
        raise PrecisionError(f"need digits >= {10 * len(xs) + 20} for {len(xs)} inputs")
    with mpmath.workdps(digits):
        vals = [_to_mpf(x, digits) for x in xs]
        rel = mpmath.pslq(vals, tol=mpmath.mpf(10) ** (-(digits - 10)),
                          maxcoeff=max_coeff, maxsteps=100000)
    if rel is None:
        return IndependenceVerdict(status="independent_up_to", certificate=None,
                                   max_coeff=max_coeff, digits=digits)
    residual = _verify(xs, rel, digits)
    if residual >= 10.0 ** (-digits / 2):
        raise PrecisionError(
            f"candidate relation {tuple(rel)} fails re-verification "
            f"(residual {residual:.3e}); raise the working precision")
    cert = RelationCertificate(coeffs=tuple(int(c) for c in rel),
                               residual=residual, digits=digits)
    return IndependenceVerdict(status="dependent", certificate=cert,
                               max_coeff=max_coeff, digits=digits)


def rotation_family_verdict(angles: Sequence[RotationAngle],
                            max_coeff: int = DEFAULT_MAX_COEFF,
                            digits: int = DEFAULT_DIGITS,
                            real_frequencies: Sequence[Fraction] | None = None
                            ) -> IndependenceVerdict:
    """Independence of the character groups of a family of rotations.

    Discrete-time rotations prepend the constant 1 (relations live mod 1);
    sampled real flows pass ``real_frequencies`` instead and use the raw
    frequency set.  An independent verdict predicts that the product flow is
    minimal; a dependent one exhibits the defeating character relation.
    """
    if real_frequencies is not None:
        xs: list = list(real_frequencies)
        if len(xs) == 1:
            # a singleton nonzero frequency admits no relation c * omega = 0
            if xs[0] == 0:
                raise DistalLabError("zero frequency is not a rotation")
            return IndependenceVerdict(status="independent_up_to", certificate=None,
                                       max_coeff=max_coeff, digits=digits)
    else:
        if len(angles) == 1:
            # a singleton irrational rotation is trivially independent
            return IndependenceVerdict(status="independent_up_to", certificate=None,
                                       max_coeff=max_coeff, digits=digits)
        xs = [Fraction(1)] + [a.model for a in angles]
    return integer_relation(xs, max_coeff=max_coeff, digits=digits)


def extend_independent_family(current: Sequence[RotationAngle],
                              candidates: Sequence[RotationAngle],
                              max_coeff: int = DEFAULT_MAX_COEFF,
                              digits: int = DEFAULT_DIGITS) -> list[RotationAngle]:
    """Greedily add candidates that keep the family independent.

    Deterministic in the input order; the finite shadow of a maximal-element
    argument.  Candidates that would create a relation are skipped.
    """
    family = list(current)
    if family:
        base = rotation_family_verdict(family, max_coeff=max_coeff, digits=digits)
        if base.dependent:
            raise DistalLabError("the current family is already dependent")
    for cand in candidates:
        trial = family + [cand]
        verdict = rotation_family_verdict(trial, max_coeff=max_coeff, digits=digits)
        if not verdict.dependent:
            family = trial
    return family


@dataclass(frozen=True)
class CrossValidation:
    verdict: IndependenceVerdict
    coverage: float
    largest_empty_cluster: int
    agree: bool

    def to_json(self) -> dict:
        return {"verdict": self.verdict.to_json(), "coverage": self.coverage,
                "largest_empty_cluster": self.largest_empty_cluster,
                "agree": self.agree}


#: coverage below this is taken as consistent with a dependent verdict
DEPENDENT_COVERAGE_MAX = 0.5
#: coverage at least this is taken as consistent with an independent verdict
INDEPENDENT_COVERAGE_MIN = 0.999


def cross_validate(angles: Sequence[RotationAngle], n: int = 10 ** 7, m: int = 32,
                   max_coeff: int = DEFAULT_MAX_COEFF, digits: int = DEFAULT_DIGITS
                   ) -> CrossValidation:
    """Play the algebraic verdict against the orbit-density probe.

    AGREE means: dependent and the product orbit visibly misses cells, or
    independent and the orbit covers the grid.  Both raw outputs are kept.
    """
    from .flows import density_probe

    if not 1 <= len(angles) <= 4:
        raise DistalLabError("cross_validate supports 1 to 4 angles (grid growth)")
    verdict = rotation_family_verdict(angles, max_coeff=max_coeff, digits=digits)
    flow = ProductFlow(tuple(RotationFlow(a) for a in angles))
    report = density_probe(flow, TorusPoint.zero(flow.dim), n, m)
    if verdict.dependent:
        agree = report.coverage <= DEPENDENT_COVERAGE_MAX
    else:
        agree = report.coverage >= INDEPENDENT_COVERAGE_MIN
    return CrossValidation(verdict=verdict, coverage=report.coverage,
                           largest_empty_cluster=report.largest_empty_cluster,
                           agree=agree)
