"""Finite factor-relation closures and the regional-proximality probe.

On a finite carrier with a finite group of symmetries the transfinite
closure of a relation collapses to a plain fixed-point iteration: saturate
by reflexivity, symmetry and the group action, square the relation, repeat.
The product lemma (a closed transitive relation containing every
single-factor embedding contains the full product relation) is checked by
exhaustive enumeration on small products, recording the induction trace.

``rp_probe`` is the torus-side counterpart: it hunts for regionally
proximal pairs by perturbing both points on a deterministic lattice and
following the fiber difference, and refutes exactly when the coordinates
separating the pair are isometric for the flow.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import DistalLabError
from .flows import Flow, ProductFlow, RotationFlow, SampledRFlow, SkewFlow
from .torus import FRAC_MOD, Frac128, TorusPoint


# ---------------------------------------------------------------------------
# finite carriers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteCarrier:
    """A finite phase space {0..n-1} with permutation generators."""

    n: int
    generators: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if isinstance(self.generators, list):
            object.__setattr__(self, "generators", tuple(tuple(g) for g in self.generators))
        for g in self.generators:
            if sorted(g) != list(range(self.n)):
                raise DistalLabError(f"generator {g} is not a permutation of 0..{self.n - 1}")


@dataclass(frozen=True)
class FiniteRelation:
    carrier: FiniteCarrier
    pairs: frozenset[tuple[int, int]]

    def __post_init__(self):
        if not isinstance(self.pairs, frozenset):
            object.__setattr__(self, "pairs", frozenset(tuple(p) for p in self.pairs))
        n = self.carrier.n
        for i, j in self.pairs:
            if not (0 <= i < n and 0 <= j < n):
                raise DistalLabError(f"pair ({i},{j}) outside carrier of size {n}")

    def matrix(self) -> np.ndarray:
        n = self.carrier.n
        mat = np.zeros((n, n), dtype=bool)
        for i, j in self.pairs:
            mat[i, j] = True
        return mat

    @classmethod
    def from_matrix(cls, carrier: FiniteCarrier, mat: np.ndarray) -> "FiniteRelation":
        idx = np.argwhere(mat)
        return cls(carrier, frozenset((int(i), int(j)) for i, j in idx))

    def classes(self) -> list[frozenset[int]]:
        """Equivalence classes, meaningful once the relation is closed."""
        mat = self.matrix()
        seen = set()
        out = []
        for i in range(self.carrier.n):
            if i in seen:
                continue
            cls_ = frozenset(int(j) for j in np.nonzero(mat[i])[0]) | {i}
            seen |= cls_
            out.append(frozenset(cls_))
        return out


def factor_closure(rel: FiniteRelation) -> FiniteRelation:
    """Smallest invariant equivalence relation containing ``rel``.

    Reflexivity, symmetry and invariance are forced first, then the relation
    is squared until it stops growing; on a finite carrier the transfinite
    tower terminates after finitely many rounds.
    """
    n = rel.carrier.n
    mat = rel.matrix()
    perms = [np.array(g, dtype=np.int64) for g in rel.carrier.generators]
    while True:
        before = mat
        mat = mat | mat.T | np.eye(n, dtype=bool)
        for p in perms:
            mat = mat | mat[np.ix_(p, p)] | mat[np.ix_(_inverse(p), _inverse(p))]
        mat = mat | (mat @ mat)
        if np.array_equal(mat, before):
            break
    return FiniteRelation.from_matrix(rel.carrier, mat)


def _inverse(p: np.ndarray) -> np.ndarray:
    inv = np.empty_like(p)
    inv[p] = np.arange(len(p))
    return inv


@dataclass(frozen=True)
class ProductClosureTrace:
    subset: tuple[int, ...]
    contained: bool
    pairs_checked: int


@dataclass(frozen=True)
class ProductClosureReport:
    passed: bool
    trace: tuple[ProductClosureTrace, ...]


def product_closure_check(rels: list[FiniteRelation]) -> ProductClosureReport:
    """Exhaustively verify the product lemma on small carriers.

    Builds the transitive closure T of the union of single-factor embeddings
    of the given relations; any closed transitive relation containing those
    embeddings contains T, so checking the full product relation against T
    settles the general claim.  The trace records the inductive chain
    {0} in, {0,1} in, ..., full index set in.
    """
    if not 1 <= len(rels) <= 3:
        raise DistalLabError("product check supports 1 to 3 carriers")
    sizes = [r.carrier.n for r in rels]
    if any(s > 6 for s in sizes):
        raise DistalLabError("carriers must have size <= 6")
    total = int(np.prod(sizes))
    points = list(itertools.product(*[range(s) for s in sizes]))
    index = {pt: k for k, pt in enumerate(points)}
    closure = np.eye(total, dtype=bool)
    for i, rel in enumerate(rels):
        for x in points:
            for (a, b) in rel.pairs:
                if x[i] == a:
                    y = list(x)
                    y[i] = b
                    closure[index[x], index[tuple(y)]] = True
    # Warshall transitive closure
    for k in range(total):
        closure |= np.outer(closure[:, k], closure[k, :])
    trace = []
    ok = True
    for upto in range(1, len(rels) + 1):
        subset = tuple(range(upto))
        checked = 0
        contained = True
        for x in points:
            choices = [rels[i].pairs if i in subset else None for i in range(len(rels))]
            partner_sets = []
            for i in range(len(rels)):
                if i in subset:
                    partner_sets.append([b for (a, b) in rels[i].pairs if a == x[i]])
                else:
                    partner_sets.append([x[i]])
            for ys in itertools.product(*partner_sets):
                checked += 1
                if not closure[index[x], index[ys]]:
                    contained = False
        trace.append(ProductClosureTrace(subset=subset, contained=contained,
                                         pairs_checked=checked))
        ok = ok and contained
    return ProductClosureReport(passed=ok, trace=tuple(trace))


# ---------------------------------------------------------------------------
# regional proximality probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RpReport:
    status: str  # "positive" | "refuted-by-isometry" | "inconclusive"
    witness_time: int | None = None
    witness_offsets: tuple[float, float] | None = None

    @property
    def positive(self) -> bool:
        return self.status == "positive"


def _leaves(flow: Flow) -> list[Flow]:
    if isinstance(flow, ProductFlow):
        out: list[Flow] = []
        for f in flow.factors:
            out.extend(_leaves(f))
        return out
    return [flow]


#: offsets of the deterministic perturbation lattice, in units of delta
_LATTICE = tuple(k / 4.0 for k in range(-4, 5))


def _skew_fiber_search(skew: SkewFlow, base: Frac128, fiber: Frac128,
                       base_p: Frac128, fiber_p: Frac128,
                       eps: float, delta: float, t_max: int) -> RpReport:
    """Lattice-perturb the base points and follow the fiber difference.

    The fiber gap after t steps is dy + G(u_t) - G(u_0) - G(v_t) + G(v_0)
    (transfer-function telescoping), which the kernel tracks on the exact
    lattice; a witness is the first t where it closes below eps while the
    perturbed bases stay eps-close.
    """
    dy = float(Fraction((fiber.raw - fiber_p.raw) % FRAC_MOD, FRAC_MOD))
    qs = [q for q, _a in skew.cocycle.terms]
    amps = np.array([a for _q, a in skew.cocycle.terms], dtype=np.float64)
    beta = [(q * skew.angle.frac.raw) % FRAC_MOD for q in qs]
    bhi = np.array([b >> 64 for b in beta], dtype=np.uint64)
    blo = np.array([b & ((1 << 64) - 1) for b in beta], dtype=np.uint64)
    kern = _kernels.active
    for ou in _LATTICE:
        u = base + Frac128.from_float((ou * delta) % 1.0)
        for ov in _LATTICE:
            v = base_p + Frac128.from_float((ov * delta) % 1.0)
            if float(u.distance(v)) >= eps:
                continue
            zu = [(q * u.raw) % FRAC_MOD for q in qs]
            zv = [(q * v.raw) % FRAC_MOD for q in qs]
            zu_hi = np.array([z >> 64 for z in zu], dtype=np.uint64)
            zu_lo = np.array([z & ((1 << 64) - 1) for z in zu], dtype=np.uint64)
            zv_hi = np.array([z >> 64 for z in zv], dtype=np.uint64)
            zv_lo = np.array([z & ((1 << 64) - 1) for z in zv], dtype=np.uint64)
            t = kern.rp_fiber_search(zu_hi, zu_lo, zv_hi, zv_lo, bhi, blo,
                                     amps, dy, int(t_max), float(eps))
            if t >= 0:
                return RpReport(status="positive", witness_time=int(t),
                                witness_offsets=(ou * delta, ov * delta))
    return RpReport(status="inconclusive")


def rp_probe(flow: Flow, x: TorusPoint, xp: TorusPoint, eps: float, delta: float,
             t_max: int) -> RpReport:
    """Search for a regionally proximal witness for the pair (x, x').

    Both points may be moved within delta (deterministic lattice of 9
    offsets per searched coordinate); positive evidence is a time t <= t_max
    at which the perturbed pair is eps-close in every coordinate.  Rotation
    coordinates (including skew bases) are exact isometries, so a pair
    separated in one of them by more than eps + 2 delta is refuted outright:
    no perturbation ever closes that gap.  Fiber separations of a single
    skew factor are searched through the transfer function; pairs separated
    in two or more fibers at once are reported inconclusive.
    """
    if eps <= 0 or delta <= 0:
        raise DistalLabError("eps and delta must be positive")
    if x.dim != flow.dim or xp.dim != flow.dim:
        raise DistalLabError("points do not match the flow dimension")
    leaves = _leaves(flow)
    coord = 0
    searchable: list[tuple[SkewFlow, int]] = []
    for leaf in leaves:
        if isinstance(leaf, (RotationFlow, SampledRFlow)):
            d = float(x.coords[coord].distance(xp.coords[coord]))
            if eps < d - 2 * delta:
                return RpReport(status="refuted-by-isometry")
            coord += 1
        elif isinstance(leaf, SkewFlow):
            d_base = float(x.coords[coord].distance(xp.coords[coord]))
            if eps < d_base - 2 * delta:
                return RpReport(status="refuted-by-isometry")
            if x.coords[coord + 1] != xp.coords[coord + 1]:
                searchable.append((leaf, coord))
            coord += 2
        else:
            raise DistalLabError(f"unknown flow leaf {leaf!r}")
    if not searchable:
        # every separated coordinate is isometric and within perturbation reach
        return RpReport(status="positive", witness_time=0)
    if len(searchable) > 1:
        return RpReport(status="inconclusive")
    leaf, c0 = searchable[0]
    return _skew_fiber_search(leaf, x.coords[c0], x.coords[c0 + 1],
                              xp.coords[c0], xp.coords[c0 + 1],
                              eps, delta, t_max)


# ---------------------------------------------------------------------------
# edge-list text format
# ---------------------------------------------------------------------------

def parse_relation_text(text: str) -> FiniteRelation:
    """Read 'n k' header, k permutation lines, then 'pairs:' and edge lines."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise DistalLabError("empty relation file")
    head = lines[0].split()
    n, k = int(head[0]), int(head[1])
    gens = []
    for ln in lines[1:1 + k]:
        gens.append(tuple(int(v) for v in ln.split()))
    if len(gens) != k or not lines[1 + k].startswith("pairs"):
        raise DistalLabError("malformed relation file: expected generators then 'pairs:'")
    pairs = set()
    for ln in lines[2 + k:]:
        a, b = ln.split()
        pairs.add((int(a), int(b)))
    return FiniteRelation(FiniteCarrier(n=n, generators=tuple(gens)), frozenset(pairs))
