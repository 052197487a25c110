"""Birkhoff averages, empirical measures, two-time-scale scans and mean gaps.

A ``MeanEstimate`` is one finite mean of a test function: discrete Birkhoff
average along an orbit, or an exact continuous-time integral mean of a
piecewise-linear function.  A ``GapReport`` collects several estimates of
the same function and records the largest pairwise difference, a computable
lower bound for the spread of invariant means.  The two-scale scan is the
workhorse: it averages one character along two increasing scale sequences
and reports the terminal gap; divergence is declared against a
self-calibrating control (the same statistic on a uniquely ergodic rotation
at equal scales), never against a magic constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DimensionMismatchError, DistalLabError
from .flows import (Flow, ProductFlow, RotationFlow, SampledRFlow, SkewFlow,
                    rotation_drifts, single_skew, skew_kernel_args)
from .torus import FRAC_MOD, Frac128, TorusPoint, named_angle

TWO_PI = 2.0 * math.pi
_EMPTY_CP = np.empty(0, dtype=np.int64)
_EMPTY_F = np.empty(0, dtype=np.float64)

#: frequency cutoff of the built-in character dictionary
DICT_MAX_FREQ = 50


# ---------------------------------------------------------------------------
# test functions: characters e^(2 pi i <m, x>)
# ---------------------------------------------------------------------------

def character_id(mvec: Sequence[int]) -> str:
    return "e(" + ",".join(str(int(v)) for v in mvec) + ")"


def check_character(mvec: Sequence[int], dim: int) -> tuple[int, ...]:
    m = tuple(int(v) for v in mvec)
    if len(m) != dim:
        raise DimensionMismatchError(f"character {m} does not match flow dim {dim}")
    if any(abs(v) > DICT_MAX_FREQ for v in m):
        raise DistalLabError(f"character frequencies are capped at |m| <= {DICT_MAX_FREQ}")
    return m


# ---------------------------------------------------------------------------
# estimates and reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeanEstimate:
    value: complex
    scale: float
    kind: str  # "discrete-birkhoff" | "continuous-integral"
    f_id: str
    f_norm: float = 1.0

    def __post_init__(self):
        if abs(self.value) > self.f_norm * (1 + 1e-9):
            raise DistalLabError(
                f"mean estimate {abs(self.value):.6f} exceeds sup|f| = {self.f_norm}")


@dataclass(frozen=True)
class GapReport:
    f_id: str
    estimates: tuple[MeanEstimate, ...]
    gap: float
    f_norm: float = 1.0

    def __post_init__(self):
        if self.gap > 2.0 * self.f_norm * (1 + 1e-9):
            raise DistalLabError(
                f"gap {self.gap:.6f} exceeds 2 sup|f| = {2 * self.f_norm}")


def mean_gap(f_id: str, estimates: Sequence[MeanEstimate]) -> GapReport:
    """Largest pairwise |difference| among the estimates: a lower bound for
    the diameter of invariant means on this function."""
    if len(estimates) < 2:
        raise DistalLabError("need at least two estimates for a gap")
    f_norm = max(e.f_norm for e in estimates)
    gap = max(abs(a.value - b.value)
              for i, a in enumerate(estimates) for b in estimates[i + 1:])
    return GapReport(f_id=f_id, estimates=tuple(estimates), gap=gap, f_norm=f_norm)


# ---------------------------------------------------------------------------
# orbit character sums
# ---------------------------------------------------------------------------

def _character_sums(flow: Flow, x0: TorusPoint, mvec: tuple[int, ...],
                    checkpoints: np.ndarray) -> np.ndarray:
    """Kahan-compensated sums of f(orbit_n) at the given sample counts."""
    kern = _kernels.active
    out_re = np.zeros(len(checkpoints), dtype=np.float64)
    out_im = np.zeros(len(checkpoints), dtype=np.float64)
    drifts = rotation_drifts(flow)
    if drifts is not None:
        ph0 = sum(m * c.raw for m, c in zip(mvec, x0.coords)) % FRAC_MOD
        dph = sum(m * d.raw for m, d in zip(mvec, drifts)) % FRAC_MOD
        phi0 = np.array([ph0 >> 64, ph0 & ((1 << 64) - 1)], dtype=np.uint64)
        kern.drift_char_scan(phi0, np.uint64(dph >> 64), np.uint64(dph & ((1 << 64) - 1)),
                             checkpoints, out_re, out_im)
        return out_re + 1j * out_im
    skew = single_skew(flow)
    if skew is not None:
        args = skew_kernel_args(skew, x0)
        kern.skew_orbit(**args, n=int(checkpoints[-1]), m=0,
                        counts=np.zeros(0, dtype=np.int64),
                        m1=float(mvec[0]), m2=float(mvec[1]),
                        checkpoints=checkpoints, out_re=out_re, out_im=out_im,
                        values_re=_EMPTY_F, values_im=_EMPTY_F, record_values=0)
        return out_re + 1j * out_im
    raise DistalLabError("character scans support rotation products and single skew flows")


def birkhoff(flow: Flow, x0: TorusPoint, mvec: Sequence[int], n: int) -> MeanEstimate:
    """(1/n) sum_{k<n} f(T^k x0) for the character f = e^(2 pi i <mvec, .>)."""
    m = check_character(mvec, flow.dim)
    if n < 1:
        raise DistalLabError("need n >= 1")
    if all(v == 0 for v in m):
        return MeanEstimate(value=1.0 + 0j, scale=n, kind="discrete-birkhoff",
                            f_id=character_id(m))
    sums = _character_sums(flow, x0, m, np.array([n], dtype=np.int64))
    return MeanEstimate(value=complex(sums[0]) / n, scale=n,
                        kind="discrete-birkhoff", f_id=character_id(m))


def two_scale_scan(flow: Flow, x0: TorusPoint, mvec: Sequence[int],
                   scales_a: Sequence[int], scales_b: Sequence[int]) -> GapReport:
    """Averages of one character along two increasing scale sequences.

    The report's ``gap`` is the terminal |avg_A - avg_B|.
    """
    m = check_character(mvec, flow.dim)
    sa = [int(s) for s in scales_a]
    sb = [int(s) for s in scales_b]
    for seq in (sa, sb):
        if not seq or any(y <= x for x, y in zip(seq, seq[1:])) or seq[0] < 1:
            raise DistalLabError("scales must be nonempty and strictly increasing")
    merged = np.array(sorted(set(sa) | set(sb)), dtype=np.int64)
    if all(v == 0 for v in m):
        avgs = {int(s): 1.0 + 0j for s in merged}
    else:
        sums = _character_sums(flow, x0, m, merged)
        avgs = {int(s): complex(v) / int(s) for s, v in zip(merged, sums)}
    fid = character_id(m)
    est_a = tuple(MeanEstimate(avgs[s], s, "discrete-birkhoff", fid) for s in sa)
    est_b = tuple(MeanEstimate(avgs[s], s, "discrete-birkhoff", fid) for s in sb)
    gap = abs(est_a[-1].value - est_b[-1].value)
    return GapReport(f_id=fid, estimates=est_a + est_b, gap=gap)


def scan_dictionary(flow: Flow, x0: TorusPoint, mvecs: Sequence[Sequence[int]],
                    scales_a: Sequence[int], scales_b: Sequence[int]
                    ) -> list[GapReport]:
    """two_scale_scan over a character dictionary, one report per character."""
    return [two_scale_scan(flow, x0, mv, scales_a, scales_b) for mv in mvecs]


def _rotation_char_avg(angle, j: int, n: int) -> complex:
    """Closed-form (1/n) sum_{k<n} e^(2 pi i j k alpha) from the exact angle."""
    top = float((j * n * angle.model) % 1)
    bot = float((j * angle.model) % 1)
    num = complex(math.cos(TWO_PI * top), math.sin(TWO_PI * top)) - 1.0
    den = complex(math.cos(TWO_PI * bot), math.sin(TWO_PI * bot)) - 1.0
    return num / (n * den)


def control_gap(scales_a: Sequence[int], scales_b: Sequence[int],
                max_freq: int = DICT_MAX_FREQ, method: str = "closed-form") -> float:
    """Terminal gap statistic of the uniquely ergodic control.

    Evaluates the golden rotation from 0 over the same scales and takes the
    max terminal gap over the character dictionary e^(2 pi i j x),
    1 <= j <= max_freq.  Divergence of a scanned flow is declared when its
    gap exceeds three times this value.  The default evaluation uses the
    exact geometric-sum closed form (the angle is stored as an exact
    rational, so phases are computed mod 1 before exponentiation); the
    "orbit" method runs the same statistic through the orbit kernels and is
    cross-checked against the closed form in the test suite.
    """
    angle = named_angle("golden")
    best = 0.0
    if method == "closed-form":
        for j in range(1, max_freq + 1):
            gap = abs(_rotation_char_avg(angle, j, int(scales_a[-1]))
                      - _rotation_char_avg(angle, j, int(scales_b[-1])))
            best = max(best, gap)
        return best
    if method != "orbit":
        raise DistalLabError(f"unknown control method {method!r}")
    flow = RotationFlow(angle)
    x0 = TorusPoint.zero(1)
    for j in range(1, max_freq + 1):
        rep = two_scale_scan(flow, x0, (j,), scales_a, scales_b)
        best = max(best, rep.gap)
    return best


DIVERGENCE_FACTOR = 3.0


# ---------------------------------------------------------------------------
# empirical measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EmpiricalMeasure:
    """Grid histogram of an orbit; the computable stand-in for an invariant
    measure.  Flat index convention: coordinate i contributes cell_i * m^i."""

    dim: int
    m: int
    counts: np.ndarray = field(repr=False)
    n_samples: int

    def __post_init__(self):
        if int(self.counts.sum()) != self.n_samples:
            raise DistalLabError("histogram counts do not add up to the sample count")

    def probabilities(self) -> np.ndarray:
        return self.counts / float(self.n_samples)

    def grid(self) -> np.ndarray:
        """Counts as an ndarray with axis i = coordinate i."""
        return self.counts.reshape((self.m,) * self.dim, order="F")

    def marginal(self, coord: int) -> "EmpiricalMeasure":
        axes = tuple(i for i in range(self.dim) if i != coord)
        counts = self.grid().sum(axis=axes) if axes else self.counts.copy()
        return EmpiricalMeasure(dim=1, m=self.m, counts=counts.reshape(-1),
                                n_samples=self.n_samples)

    def sup_cell_gap(self, other: "EmpiricalMeasure") -> float:
        if (self.dim, self.m) != (other.dim, other.m):
            raise DistalLabError("incompatible grids")
        return float(np.max(np.abs(self.probabilities() - other.probabilities())))


def empirical_measure(flow: Flow, x0: TorusPoint, n: int, m: int) -> EmpiricalMeasure:
    from .flows import orbit_histogram

    counts = orbit_histogram(flow, x0, n, m)
    return EmpiricalMeasure(dim=flow.dim, m=m, counts=counts, n_samples=n)


@dataclass(frozen=True)
class JoiningReport:
    factor_deviation: tuple[float, ...]
    product_vs_marginals: float


def joining_marginal_check(flow: ProductFlow, x0: TorusPoint, n: int, m: int) -> JoiningReport:
    """Compare the product-orbit histogram against the factors' own runs.

    The pushforward of the joint histogram onto factor i equals the factor's
    own histogram exactly when the initial points match (a counting
    identity).  The report also carries the sup-cell distance between the
    joint histogram and the product of its marginals: zero-ish for a product
    joining, visibly positive when mass sits on a proper coset.
    """
    if not isinstance(flow, ProductFlow) or len(flow.factors) < 2:
        raise DistalLabError("joining check needs a product flow with >= 2 factors")
    joint = empirical_measure(flow, x0, n, m)
    devs = []
    i = 0
    marg_probs = []
    for idx, f in enumerate(flow.factors):
        if f.dim != 1:
            raise DistalLabError("joining check supports one-dimensional factors")
        own = empirical_measure(f, TorusPoint(x0.coords[i:i + 1]), n, m)
        marg = joint.marginal(idx)
        devs.append(marg.sup_cell_gap(own))
        marg_probs.append(marg.probabilities())
        i += f.dim
    outer = marg_probs[0]
    for p in marg_probs[1:]:
        outer = np.multiply.outer(outer, p)
    # outer[i0, i1, ...] with axis order = factor order matches grid()
    gap = float(np.max(np.abs(joint.grid() / n - outer)))
    return JoiningReport(factor_deviation=tuple(devs), product_vs_marginals=gap)


# ---------------------------------------------------------------------------
# exact continuous-time means
# ---------------------------------------------------------------------------

def continuous_time_mean(f, a: float) -> MeanEstimate:
    """(1/a) * integral_0^a f, exact for piecewise-linear f.

    ``f`` is an interpolated function exposing ``integral(lo, hi)`` (exact
    trapezoid form) and ``sup_norm``; see the interp module.
    """
    if a <= 0:
        raise DistalLabError("averaging length must be positive")
    value = f.integral(0.0, float(a)) / float(a)
    return MeanEstimate(value=complex(value), scale=float(a),
                        kind="continuous-integral", f_id=f.f_id,
                        f_norm=f.sup_norm * (1 + 1e-12))
