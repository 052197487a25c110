"""Flow constructors and the orbit engine.

Flows are immutable specs: circle rotations, skew products over a rotation,
finite products, and sampled real-time rotation flows whose action speed can
be rescaled.  Base coordinates advance exactly on the 2^-128 lattice; skew
fibers accumulate quantized cocycle increments.  Long orbits (histograms,
coverage, scans) run through the kernel backends; ``step`` is the exact
single-step reference the kernels are tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .cocycle import CocycleSpec, eval_phi
from .errors import DimensionMismatchError, DistalLabError
from .torus import FRAC_MOD, Frac128, RotationAngle, TorusPoint


class Flow:
    """Base class; concrete flows are frozen dataclasses below."""

    dim: int

    def to_json(self) -> dict:  # pragma: no cover - overridden
        raise NotImplementedError


@dataclass(frozen=True)
class RotationFlow(Flow):
    angle: RotationAngle
    dim: int = 1

    def drift(self) -> Frac128:
        return self.angle.frac

    def to_json(self) -> dict:
        return {"kind": "rotation", "angle": self.angle.to_json()}


@dataclass(frozen=True)
class SampledRFlow(Flow):
    """A real-time rotation flow observed at sampling step dt.

    ``scale`` carries accumulated time changes: the effective per-sample
    rotation is rate * scale * dt (mod 1), quantized once.
    """

    rate: RotationAngle
    dt: Fraction = Fraction(1)
    scale: Fraction = Fraction(1)
    dim: int = 1

    def effective_fraction(self) -> Fraction:
        return (self.rate.model * self.scale * self.dt) % 1

    def drift(self) -> Frac128:
        return Frac128.from_fraction(self.effective_fraction())

    def frequency(self) -> Fraction:
        """The raw real-flow frequency after time change (per unit time)."""
        return self.rate.model * self.scale

    def to_json(self) -> dict:
        return {"kind": "sampled-r", "rate": self.rate.to_json(),
                "dt": str(self.dt), "scale": str(self.scale)}


@dataclass(frozen=True)
class SkewFlow(Flow):
    angle: RotationAngle
    cocycle: CocycleSpec
    dim: int = 2

    def to_json(self) -> dict:
        return {"kind": "skew", "cocycle": self.cocycle.to_json()}


@dataclass(frozen=True)
class ProductFlow(Flow):
    factors: tuple[Flow, ...]

    def __post_init__(self):
        if isinstance(self.factors, list):
            object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) < 1:
            raise DistalLabError("product flow needs at least one factor")

    @property
    def dim(self) -> int:  # type: ignore[override]
        return sum(f.dim for f in self.factors)

    def to_json(self) -> dict:
        return {"kind": "product", "factors": [f.to_json() for f in self.factors]}


def product_flow(factors: Iterable[Flow]) -> ProductFlow:
    return ProductFlow(tuple(factors))


def time_change(flow: Flow, a) -> Flow:
    """Rescale the action speed of a sampled real flow by a > 0.

    Orbits, invariant-measure estimates and the proximal structure are those
    of the base flow; only the sampling drift changes.
    """
    a = Fraction(a)
    if a <= 0:
        raise DistalLabError("time change factor must be positive")
    if isinstance(flow, SampledRFlow):
        return SampledRFlow(rate=flow.rate, dt=flow.dt, scale=flow.scale * a)
    if isinstance(flow, ProductFlow):
        return ProductFlow(tuple(time_change(f, a) for f in flow.factors))
    raise DistalLabError("time change applies only to sampled real flows")


# ---------------------------------------------------------------------------
# exact single step
# ---------------------------------------------------------------------------

def step(flow: Flow, x: TorusPoint) -> TorusPoint:
    """One application of the flow map, exact on the lattice."""
    if x.dim != flow.dim:
        raise DimensionMismatchError(f"point dim {x.dim} != flow dim {flow.dim}")
    if isinstance(flow, (RotationFlow, SampledRFlow)):
        return TorusPoint((x.coords[0] + flow.drift(),))
    if isinstance(flow, SkewFlow):
        base, fiber = x.coords
        inc = eval_phi(flow.cocycle, base, tol=max(flow.cocycle.tail_bound, 1e-9))
        return TorusPoint((base + flow.angle.frac, fiber + Frac128.from_float(inc)))
    if isinstance(flow, ProductFlow):
        out = []
        i = 0
        for f in flow.factors:
            out.extend(step(f, TorusPoint(x.coords[i:i + f.dim])).coords)
            i += f.dim
        return TorusPoint(tuple(out))
    raise DistalLabError(f"unknown flow {flow!r}")


@dataclass
class OrbitStream:
    """A mutable cursor along an orbit (exact reference path)."""

    flow: Flow
    current: TorusPoint
    step_index: int = 0

    def advance(self, n: int = 1) -> TorusPoint:
        for _ in range(n):
            self.current = step(self.flow, self.current)
            self.step_index += 1
        return self.current


# ---------------------------------------------------------------------------
# kernel plans
# ---------------------------------------------------------------------------

def rotation_drifts(flow: Flow) -> list[Frac128] | None:
    """Per-coordinate drifts when the flow is a product of rotations."""
    if isinstance(flow, (RotationFlow, SampledRFlow)):
        return [flow.drift()]
    if isinstance(flow, ProductFlow):
        out: list[Frac128] = []
        for f in flow.factors:
            sub = rotation_drifts(f)
            if sub is None:
                return None
            out.extend(sub)
        return out
    return None


def single_skew(flow: Flow) -> SkewFlow | None:
    if isinstance(flow, SkewFlow):
        return flow
    if isinstance(flow, ProductFlow) and len(flow.factors) == 1:
        return single_skew(flow.factors[0])
    return None


def _pairs(raws: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    hi = np.array([r >> 64 for r in raws], dtype=np.uint64)
    lo = np.array([r & ((1 << 64) - 1) for r in raws], dtype=np.uint64)
    return hi, lo


def skew_kernel_args(flow: SkewFlow, x0: TorusPoint) -> dict:
    """Initial state and per-term drift words for the skew kernels."""
    base, fiber = x0.coords
    alpha_raw = flow.angle.frac.raw
    qs = [q for q, _a in flow.cocycle.terms]
    z0 = [(q * base.raw) % FRAC_MOD for q in qs]
    beta = [(q * alpha_raw) % FRAC_MOD for q in qs]
    zhi, zlo = _pairs(z0)
    bhi, blo = _pairs(beta)
    coeff, coff = flow.cocycle.kernel_coefficients()
    return {
        "axhi": np.uint64(alpha_raw >> 64), "axlo": np.uint64(alpha_raw & ((1 << 64) - 1)),
        "x0hi": np.uint64(base.raw >> 64), "x0lo": np.uint64(base.raw & ((1 << 64) - 1)),
        "y0hi": np.uint64(fiber.raw >> 64), "y0lo": np.uint64(fiber.raw & ((1 << 64) - 1)),
        "zhi": zhi, "zlo": zlo, "bhi": bhi, "blo": blo,
        "coeff": coeff, "coff": coff,
    }


_EMPTY_CP = np.empty(0, dtype=np.int64)
_EMPTY_F = np.empty(0, dtype=np.float64)


def orbit_histogram(flow: Flow, x0: TorusPoint, n: int, m: int) -> np.ndarray:
    """Cell counts of the first n orbit points on the m^dim grid.

    Flat index convention: coordinate i contributes cell_i * m^i.
    """
    if x0.dim != flow.dim:
        raise DimensionMismatchError(f"point dim {x0.dim} != flow dim {flow.dim}")
    if not 2 <= m <= 4096:
        raise DistalLabError("grid resolution m must be in [2, 4096]")
    kern = _kernels.active
    drifts = rotation_drifts(flow)
    if drifts is not None:
        ahi, alo = _pairs([d.raw for d in drifts])
        xhi, xlo = _pairs([c.raw for c in x0.coords])
        counts = np.zeros(m ** flow.dim, dtype=np.int64)
        kern.rotation_histogram(ahi, alo, xhi, xlo, n, m, counts)
        return counts
    skew = single_skew(flow)
    if skew is not None:
        args = skew_kernel_args(skew, x0)
        counts = np.zeros(m * m, dtype=np.int64)
        kern.skew_orbit(**args, n=n, m=m, counts=counts,
                        m1=0, m2=0, checkpoints=_EMPTY_CP,
                        out_re=_EMPTY_F, out_im=_EMPTY_F,
                        values_re=_EMPTY_F, values_im=_EMPTY_F, record_values=0)
        return counts
    raise DistalLabError("histograms support rotation products and single skew flows")


# ---------------------------------------------------------------------------
# coverage probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverageReport:
    dim: int
    m: int
    n: int
    visited: int
    coverage: float
    largest_empty_cluster: int


def _largest_empty_cluster(counts: np.ndarray, m: int, d: int) -> int:
    """Largest orthogonally-connected component of empty cells (periodic grid)."""
    empty = counts == 0
    if not np.any(empty):
        return 0
    shape = (m,) * d
    empty_nd = empty.reshape(shape, order="F")
    seen = np.zeros(shape, dtype=bool)
    best = 0
    coords = np.argwhere(empty_nd)
    for start in coords:
        start = tuple(start)
        if seen[start]:
            continue
        size = 0
        stack = [start]
        seen[start] = True
        while stack:
            cell = stack.pop()
            size += 1
            for axis in range(d):
                for delta in (-1, 1):
                    nb = list(cell)
                    nb[axis] = (nb[axis] + delta) % m
                    nb = tuple(nb)
                    if empty_nd[nb] and not seen[nb]:
                        seen[nb] = True
                        stack.append(nb)
        best = max(best, size)
    return best


def density_probe(flow: Flow, x0: TorusPoint, n: int, m: int) -> CoverageReport:
    """Fraction of grid cells visited by the orbit: numerical evidence for
    (or against) minimality, never a certificate."""
    counts = orbit_histogram(flow, x0, n, m)
    visited = int(np.count_nonzero(counts))
    return CoverageReport(
        dim=flow.dim, m=m, n=n, visited=visited,
        coverage=visited / counts.size,
        largest_empty_cluster=_largest_empty_cluster(counts, m, flow.dim),
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def flow_from_json(data: dict) -> Flow:
    kind = data.get("kind")
    if kind == "rotation":
        return RotationFlow(RotationAngle.from_json(data["angle"]))
    if kind == "sampled-r":
        return SampledRFlow(rate=RotationAngle.from_json(data["rate"]),
                            dt=Fraction(data["dt"]), scale=Fraction(data["scale"]))
    if kind == "skew":
        spec = data["cocycle"]
        angle = RotationAngle.from_json(spec["alpha"])
        terms = tuple((int(q), float(a)) for q, a in spec["terms"])
        cc = CocycleSpec(alpha=angle, terms=terms, tail_bound=float(spec["tail_bound"]))
        return SkewFlow(angle=angle, cocycle=cc)
    if kind == "product":
        return ProductFlow(tuple(flow_from_json(f) for f in data["factors"]))
    raise DistalLabError(f"unknown flow kind {kind!r}")
