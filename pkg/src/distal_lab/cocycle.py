"""Lacunary circle cocycles over an irrational rotation.

A cocycle here is t(x) = e^(2 pi i phi(x)) with

    phi(x) = sum_k a_k [ sin(2 pi q_k (x + alpha)) - sin(2 pi q_k x) ],

where the q_k are convergent denominators of alpha.  Each term is bounded by
2 pi a_k ||q_k alpha||, so a finite selection is always continuous; the
interesting regimes pick q_k with collapsing ||q_k alpha|| so that the
formal transfer function G(x) = sum_k a_k sin(2 pi q_k x) has wildly
oscillating partial sums while phi stays tame.

Evaluation uses the cancellation-free product form

    sin(2 pi q (x + alpha)) - sin(2 pi q x)
        = 2 sin(pi eps) cos(2 pi (q x mod 1) + pi eps),   eps = q alpha mod 1
          folded to (-1/2, 1/2],

with q x mod 1 computed exactly in integer arithmetic; this stays accurate
even when ||q alpha|| is far below float resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DistalLabError, SummabilityError, ToleranceError
from .torus import FRAC_MOD, Frac128, RotationAngle

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CocycleSpec:
    """A truncated lacunary cocycle over rotation by ``alpha``.

    ``terms`` holds (q_k, a_k) pairs with q_k taken from the convergents of
    alpha; ``tail_bound`` is a conservative upper bound on the uniform error
    of the truncation against the modeled infinite series, computed from the
    stored part of the convergent ladder beyond the selected terms.
    """

    alpha: RotationAngle
    terms: tuple[tuple[int, float], ...]
    tail_bound: float
    warning: str | None = None
    drifts: tuple[Fraction, ...] = field(repr=False, default=())

    def __post_init__(self):
        if not self.drifts:
            object.__setattr__(
                self, "drifts",
                tuple(self.alpha.signed_drift(q) for q, _a in self.terms),
            )

    @property
    def amplitudes(self) -> tuple[float, ...]:
        """Per-term uniform bounds 2 a_k |sin(pi eps_k)| on phi's terms."""
        return tuple(2.0 * abs(a) * abs(math.sin(math.pi * float(e)))
                     for (_q, a), e in zip(self.terms, self.drifts))

    def kernel_coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """(coeff, coff) arrays: phi(x) = sum coeff_k cos(2 pi z_k + coff_k)."""
        coeff = np.array([2.0 * a * math.sin(math.pi * float(e))
                          for (_q, a), e in zip(self.terms, self.drifts)],
                         dtype=np.float64)
        coff = np.array([math.pi * float(e) for e in self.drifts], dtype=np.float64)
        return coeff, coff

    def coefficient_sum(self) -> float:
        """sum a_k; divergence of this sum in the modeled infinite series is
        the obstruction datum recorded for the construction."""
        return float(sum(a for _q, a in self.terms))

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha.to_json(),
            "terms": [[q, a] for q, a in self.terms],
            "tail_bound": self.tail_bound,
        }


def _rule_coefficient(rule: str, position: int) -> float:
    """Coefficient of the term at 1-based ``position`` under a named rule."""
    if rule == "unit":
        return 1.0
    if rule.startswith("geometric"):
        r = float(rule.split(":", 1)[1]) if ":" in rule else 0.5
        return r ** position
    raise DistalLabError(f"unknown coefficient rule {rule!r}")


def jump_indices(angle: RotationAngle) -> list[int]:
    """Convergent indices where the next partial quotient at least doubles
    the running maximum: the scale jumps of the approximation ladder.

    Index 0 seeds the list (the constant term of the ladder).
    """
    cf = angle.cf
    out = [0]
    running = 0
    for k in range(1, len(cf) - 1):
        if cf[k + 1] >= 2 * max(running, 1) and running > 0:
            out.append(k)
        running = max(running, cf[k])
    return out


def build_cocycle(angle: RotationAngle, K: int, coeff_rule: str = "unit",
                  indices: tuple[int, ...] | None = None) -> CocycleSpec:
    """Select K cocycle terms from the convergents of ``angle``.

    By default the terms sit at the ladder's scale jumps (see
    :func:`jump_indices`); angles without enough jumps (badly approximable
    ones such as the golden rotation) fall back to the leading convergents
    and carry a warning, since they cannot break equicontinuity.  Explicit
    ``indices`` override the selection.
    """
    qs = [q for _p, q in angle.convergents]
    if K == 0 or (indices is not None and len(indices) == 0):
        # the trivial cocycle: the skew product degenerates to a plain product
        return CocycleSpec(alpha=angle, terms=(), tail_bound=0.0)
    if indices is None:
        chosen = jump_indices(angle)
        warning = None
        if len(chosen) < K:
            seen: list[int] = []
            for k, q in enumerate(qs):
                if not seen or q > qs[seen[-1]]:
                    seen.append(k)
                if len(seen) == K:
                    break
            chosen = seen
            warning = ("slow-approximation angle: no lacunary jump structure at this "
                       "depth; falling back to the leading convergents (the "
                       "equicontinuity-breaking heuristic is not met)")
        chosen = chosen[:K]
    else:
        chosen = list(indices)
        warning = None
    if len(chosen) < K:
        raise DistalLabError(f"angle provides only {len(chosen)} usable terms, {K} requested")
    if any(k >= len(qs) for k in chosen):
        raise DistalLabError("term index beyond the stored convergents")

    terms = tuple((qs[k], _rule_coefficient(coeff_rule, j + 1))
                  for j, k in enumerate(sorted(chosen)))
    weights = [abs(a) * float(angle.approx_dist(q)) for q, a in terms]
    if len(weights) >= 2 and all(b >= a and b > 0 for a, b in zip(weights, weights[1:])):
        raise SummabilityError(
            "cocycle not continuous at this truncation: a_k ||q_k alpha|| is "
            "nondecreasing over the selected terms"
        )

    last = max(sorted(chosen))
    a_cont = _rule_coefficient(coeff_rule, len(chosen) + 1)
    if coeff_rule.startswith("geometric"):
        r = float(coeff_rule.split(":", 1)[1]) if ":" in coeff_rule else 0.5
        if r < 1:
            a_cont = a_cont / (1.0 - r)
    omitted = [float(angle.approx_dist(q)) for q in qs[last + 1:]]
    deepest = omitted[-1] if omitted else float(angle.approx_dist(qs[last]))
    tail = TWO_PI * abs(a_cont) * (sum(omitted) + 2.0 * deepest)
    return CocycleSpec(alpha=angle, terms=terms, tail_bound=tail, warning=warning)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def eval_phi(c: CocycleSpec, x: Frac128, tol: float) -> float:
    """phi(x) for a lattice point, within ``tol`` of the modeled series."""
    if tol < c.tail_bound:
        raise ToleranceError(f"tolerance {tol:g} below tail bound {c.tail_bound:g}")
    total = 0.0
    for (q, a), e in zip(c.terms, c.drifts):
        z = ((q * x.raw) % FRAC_MOD) / FRAC_MOD
        total += 2.0 * a * math.sin(math.pi * float(e)) * math.cos(TWO_PI * z + math.pi * float(e))
    return total


def transfer_partial(c: CocycleSpec, x: Frac128, K: int | None = None) -> float:
    """Partial transfer function G_K(x) = sum_{k<=K} a_k sin(2 pi q_k x)."""
    K = len(c.terms) if K is None else K
    total = 0.0
    for q, a in c.terms[:K]:
        z = ((q * x.raw) % FRAC_MOD) / FRAC_MOD
        total += a * math.sin(TWO_PI * z)
    return total


@dataclass(frozen=True)
class MeasurableSolution:
    """g_K = e^(2 pi i G_K), the truncated fiber solution of the transfer
    equation; at truncation matching the cocycle the quotient identity
    g(x + alpha)/g(x) = t(x) is an algebraic identity."""

    cocycle: CocycleSpec
    K: int

    def value(self, x: Frac128) -> complex:
        g = transfer_partial(self.cocycle, x, self.K)
        return complex(math.cos(TWO_PI * g), math.sin(TWO_PI * g))

    def quotient(self, x: Frac128) -> complex:
        """g(x + alpha)/g(x), evaluated through the exact rational shift."""
        c = self.cocycle
        alpha = c.alpha.model
        xf = Fraction(x.raw, FRAC_MOD)
        diff = 0.0
        for q, a in c.terms[:self.K]:
            z0 = float((q * xf) % 1)
            z1 = float((q * (xf + alpha)) % 1)
            diff += a * (math.sin(TWO_PI * z1) - math.sin(TWO_PI * z0))
        return complex(math.cos(TWO_PI * diff), math.sin(TWO_PI * diff))


def _phi_model(c: CocycleSpec, xf: Fraction) -> float:
    """phi at an exact rational point, shifting by the exact model angle."""
    total = 0.0
    for (q, a), e in zip(c.terms, c.drifts):
        z = float((q * xf) % 1)
        total += 2.0 * a * math.sin(math.pi * float(e)) * math.cos(TWO_PI * z + math.pi * float(e))
    return total


def cocycle_values(c: CocycleSpec, x: Frac128, power: int = 1) -> complex:
    """t(x)^power as a unit complex number."""
    phi = _phi_model(c, Fraction(x.raw, FRAC_MOD))
    ang = TWO_PI * power * phi
    return complex(math.cos(ang), math.sin(ang))


# ---------------------------------------------------------------------------
# residuals of the two functional equations
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _grid_phi_cached(c: CocycleSpec, log2_grid: int) -> np.ndarray:
    g = 1 << log2_grid
    i = np.arange(g, dtype=np.int64)
    total = np.zeros(g, dtype=np.float64)
    for (q, a), e in zip(c.terms, c.drifts):
        z = ((i * (q % g)) % g) / float(g)
        total += 2.0 * a * math.sin(math.pi * float(e)) * np.cos(TWO_PI * z + math.pi * float(e))
    return total


def _grid_phi(c: CocycleSpec, log2_grid: int) -> np.ndarray:
    """phi on the dyadic grid i/2^g, exact small-integer phase arithmetic."""
    return _grid_phi_cached(c, log2_grid)


def residual_eq1(c: CocycleSpec, f: dict[int, complex], m: int,
                 log2_grid: int = 16) -> float:
    """Sup over a dyadic grid of |f(x+alpha)/f(x) - t(x)^m|.

    ``f`` is a finite Fourier polynomial {frequency: coefficient}.  A large
    residual for every f in a search dictionary is evidence that the first
    functional equation has no solution (a minimality witness); a residual
    near zero exhibits an approximate solution.
    """
    if m == 0:
        raise DistalLabError("the exponent m must be a nonzero integer")
    if not f:
        raise DistalLabError("empty Fourier polynomial")
    g = 1 << log2_grid
    i = np.arange(g, dtype=np.int64)
    alpha = float(c.alpha.model)
    fx = np.zeros(g, dtype=np.complex128)
    fshift = np.zeros(g, dtype=np.complex128)
    for j, coef in f.items():
        base = np.exp(TWO_PI * 1j * ((i * (j % g)) % g) / g)
        fx += complex(coef) * base
        fshift += complex(coef) * np.exp(TWO_PI * 1j * j * alpha) * base
    if float(np.min(np.abs(fx))) < 1e-9:
        raise DistalLabError("f vanishes on the grid; the quotient is not defined")
    t_m = np.exp(TWO_PI * 1j * m * _grid_phi(c, log2_grid))
    return float(np.max(np.abs(fshift / fx - t_m)))


@dataclass(frozen=True)
class ResidualSummary:
    count: int
    max: float
    median: float
    mean: float


def residual_eq2(c: CocycleSpec, K: int, n: int, samples: int = 10000,
                 seed: int = 2024) -> ResidualSummary:
    """Distribution of |g_K(x+alpha)/g_K(x) - t(x)^n| over random lattice points.

    At K matching the truncation of ``c`` and n = 1 the residual is an
    algebraic zero (float roundoff only); mismatched K isolates single-term
    errors, and |n| >= 2 measures how far t^n sits from this coboundary.
    """
    if n == 0:
        raise DistalLabError("the exponent n must be a nonzero integer")
    rng = np.random.default_rng(seed)
    sol = MeasurableSolution(c, K)
    vals = np.empty(samples, dtype=np.float64)
    for s in range(samples):
        x = Frac128(int.from_bytes(rng.bytes(16), "big"))
        lhs = sol.quotient(x)
        rhs = cocycle_values(c, x, power=n)
        vals[s] = abs(lhs - rhs)
    return ResidualSummary(count=samples, max=float(np.max(vals)),
                           median=float(np.median(vals)), mean=float(np.mean(vals)))
