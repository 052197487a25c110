"""Named, fully deterministic experiment presets.

Each preset is a zero-argument builder returning a :class:`PresetResult`
with JSON-able summary values and CSV tables; re-running a preset
byte-reproduces its outputs.  The presets cover every finitely checkable
claim the package makes: equidistribution control, dependence/independence
cross-validation, the two-scale divergence witness, coboundary exactness,
the minimality refutation search, the regional-proximality probe, finite
closure oracles, interpolation exactness, and the three-factor separation
construction.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import cocycle as cocyclemod
from . import disjoint, ergodic, flows, interp, relations
from .errors import DistalLabError
from .torus import Frac128, RotationAngle, TorusPoint, liouville_angle, named_angle, sparse_power_angle

#: character shortlist scanned by the divergence presets (fiber-heavy first)
SCAN_CHARACTERS = ((0, 1), (1, 1), (0, 2), (1, 2), (2, 1), (1, 0))

#: perturbation/test parameters of the regional-proximality preset
RP_EPS = 0.02
RP_DELTA = 0.005
RP_T_MAX = 25000


@dataclass
class PresetResult:
    name: str
    values: dict
    tables: dict[str, tuple[list[str], list[list]]] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# shared constructions
# ---------------------------------------------------------------------------

def furstenberg_angle() -> RotationAngle:
    return liouville_angle(4)


def separation_angles() -> tuple[RotationAngle, RotationAngle, RotationAngle]:
    """Three mutually independent well-approximable angles (distinct bases)."""
    return (liouville_angle(4),
            sparse_power_angle(3, (1, 2, 11, 26, 54)),
            sparse_power_angle(7, (1, 2, 9, 22, 46)))


#: convergent indices of the scanned cocycle terms: leading term, first scale
#: jump, and the mid-ladder fill whose drift period is reachable by orbit
SCAN_TERM_INDICES = (0, 2, 4)


def scan_cocycle(angle: RotationAngle) -> cocyclemod.CocycleSpec:
    """Cocycle used by the divergence scans.

    The default jump-rule terms put the deepest drift period far beyond any
    reachable orbit length (every reachable scale then sits in a single
    averaging plateau and the two-scale gap collapses); pinning the third
    term to the mid-ladder convergent keeps its period inside the scan
    range.
    """
    return cocyclemod.build_cocycle(angle, 3, indices=SCAN_TERM_INDICES)


def default_scales(angle: RotationAngle, c: cocyclemod.CocycleSpec
                   ) -> tuple[list[int], list[int]]:
    """Doubled convergent-denominator scales, split even/odd index.

    Scales are capped at four drift periods of the deepest cocycle term:
    beyond that every term is averaged out and the finite truncation shows
    no gap (and each doubled denominator completes near-integer cycles of
    every faster term, collapsing partial sums).
    """
    qs = [q for _p, q in angle.convergents]
    q_last = c.terms[-1][0]
    cap = 4.0 / float(angle.approx_dist(q_last))
    a = [2 * q for k, q in enumerate(qs) if k % 2 == 0 and 2 * q <= cap]
    b = [2 * q for k, q in enumerate(qs) if k % 2 == 1 and 2 * q <= cap]
    a = sorted(set(a))
    b = sorted(set(b))
    if not a or not b:
        raise DistalLabError("no usable scales below the drift-period cap")
    return a, b


def furstenberg_flow() -> flows.SkewFlow:
    angle = furstenberg_angle()
    return flows.SkewFlow(angle=angle, cocycle=scan_cocycle(angle))


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def preset_equidistribution_control() -> PresetResult:
    angle = named_angle("golden")
    flow = flows.RotationFlow(angle)
    n, m = 10 ** 7, 100
    t0 = time.perf_counter()
    em = ergodic.empirical_measure(flow, TorusPoint.zero(1), n, m)
    elapsed = time.perf_counter() - t0
    p = em.probabilities()
    rows = [[i, int(em.counts[i]), repr(float(p[i]))] for i in range(m)]
    return PresetResult(
        name="equidistribution-control",
        values={"n": n, "m": m, "min_p": float(p.min()), "max_p": float(p.max()),
                "max_dev": float(np.max(np.abs(p - 1.0 / m))), "seconds": elapsed},
        tables={"hist": (["cell", "count", "p"], rows)},
    )


def _crossval(angles, n=10 ** 7, m=32) -> dict:
    cv = disjoint.cross_validate(angles, n=n, m=m)
    return cv.to_json()


def preset_dependent_pair() -> PresetResult:
    from .torus import doubled_angle

    a = named_angle("sqrt2-1")
    values = _crossval([a, doubled_angle(a)])
    return PresetResult(name="dependent-pair-crossval", values=values)


def preset_independent_pair() -> PresetResult:
    t0 = time.perf_counter()
    values = _crossval([named_angle("sqrt2-1"), named_angle("sqrt3-1")])
    values["seconds"] = time.perf_counter() - t0
    return PresetResult(name="independent-pair-crossval", values=values)


def _best_scan(flow: flows.SkewFlow, scales_a, scales_b, x0=None):
    """Max-gap character over the scan shortlist, with the control gap."""
    x0 = x0 or TorusPoint.zero(2)
    control = ergodic.control_gap(scales_a, scales_b)
    best = None
    reports = []
    for mvec in SCAN_CHARACTERS:
        rep = ergodic.two_scale_scan(flow, x0, mvec, scales_a, scales_b)
        reports.append(rep)
        if best is None or rep.gap > best.gap:
            best = rep
    return best, control, reports


def preset_furstenberg_divergence() -> PresetResult:
    flow = furstenberg_flow()
    scales_a, scales_b = default_scales(flow.angle, flow.cocycle)
    best, control, reports = _best_scan(flow, scales_a, scales_b)
    rows = []
    na, nb = len(scales_a), len(scales_b)
    avgs = {e.scale: e.value for e in best.estimates}
    for i in range(max(na, nb)):
        sa = scales_a[min(i, na - 1)]
        sb = scales_b[min(i, nb - 1)]
        va, vb = avgs[sa], avgs[sb]
        rows.append([i, sa, repr(va.real), repr(va.imag), sb,
                     repr(vb.real), repr(vb.imag), repr(abs(va - vb))])
    return PresetResult(
        name="furstenberg-divergence",
        values={"f_id": best.f_id, "gap": best.gap, "control": control,
                "ratio": best.gap / control,
                "divergent": best.gap > ergodic.DIVERGENCE_FACTOR * control,
                "scales_a": scales_a, "scales_b": scales_b,
                "terms": [[q, a] for q, a in flow.cocycle.terms],
                "all_gaps": {r.f_id: r.gap for r in reports}},
        tables={"gaps": (["row", "scaleA", "avgA_re", "avgA_im",
                          "scaleB", "avgB_re", "avgB_im", "gap"], rows)},
    )


def preset_coboundary_exactness() -> PresetResult:
    flow = furstenberg_flow()
    c = flow.cocycle
    matched = cocyclemod.residual_eq2(c, K=len(c.terms), n=1, samples=10 ** 4)
    short = cocyclemod.residual_eq2(c, K=len(c.terms) - 1, n=1, samples=2000)
    squared = cocyclemod.residual_eq2(c, K=len(c.terms), n=2, samples=10 ** 4)
    q_last, a_last = c.terms[-1]
    # |e^{iA}-e^{iB}| = 2|sin(pi term)| <= 2 pi |term| <= 4 pi^2 a ||q alpha||
    bound = 4 * math.pi ** 2 * abs(a_last) * float(c.alpha.approx_dist(q_last))
    return PresetResult(
        name="coboundary-exactness",
        values={"matched_max": matched.max, "matched_median": matched.median,
                "short_max": short.max, "short_bound": bound,
                "squared_median": squared.median},
    )


def preset_minimality_evidence() -> PresetResult:
    flow = furstenberg_flow()
    c = flow.cocycle
    rows = []
    worst = None
    for m in (-2, -1, 1, 2):
        for j in range(-50, 51):
            r = cocyclemod.residual_eq1(c, {j: 1.0}, m)
            rows.append([j, m, repr(r)])
            if worst is None or r < worst[0]:
                worst = (r, j, m)
    cov = flows.density_probe(flow, TorusPoint.zero(2), 10 ** 7, 32)
    return PresetResult(
        name="minimality-evidence",
        values={"min_residual": worst[0], "argmin_j": worst[1], "argmin_m": worst[2],
                "coverage": cov.coverage,
                "largest_empty_cluster": cov.largest_empty_cluster},
        tables={"eq1": (["j", "m", "sup_residual"], rows)},
    )


def preset_eq_factor_probe() -> PresetResult:
    flow = furstenberg_flow()
    rng = np.random.default_rng(20240607)

    def random_frac():
        return Frac128(int.from_bytes(rng.bytes(16), "big"))

    same_total = distinct_total = 100
    positive = 0
    witness_times = []
    for _ in range(same_total):
        s = random_frac()
        y, yp = random_frac(), random_frac()
        rep = relations.rp_probe(flow, TorusPoint((s, y)), TorusPoint((s, yp)),
                                 eps=RP_EPS, delta=RP_DELTA, t_max=RP_T_MAX)
        if rep.positive:
            positive += 1
            witness_times.append(rep.witness_time)
    refuted = 0
    tested = 0
    while tested < distinct_total:
        a, b = random_frac(), random_frac()
        if float(a.distance(b)) <= RP_EPS + 2 * RP_DELTA:
            continue  # refutation only applies beyond perturbation reach
        tested += 1
        rep = relations.rp_probe(flow, TorusPoint((a, random_frac())),
                                 TorusPoint((b, random_frac())),
                                 eps=RP_EPS, delta=RP_DELTA, t_max=RP_T_MAX)
        if rep.status == "refuted-by-isometry":
            refuted += 1
    return PresetResult(
        name="eq-factor-probe",
        values={"same_base_positive": positive, "same_base_total": same_total,
                "distinct_base_refuted": refuted, "distinct_base_total": distinct_total,
                "median_witness_time": float(np.median(witness_times)) if witness_times else None,
                "eps": RP_EPS, "delta": RP_DELTA, "t_max": RP_T_MAX},
    )


# -- finite closure oracle ---------------------------------------------------

def closure_oracle(rel: relations.FiniteRelation) -> relations.FiniteRelation:
    """Independent union-find construction of the minimal invariant
    equivalence relation (used to cross-check factor_closure)."""
    n = rel.carrier.n
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
            return True
        return False

    pending = list(rel.pairs)
    while pending:
        i, j = pending.pop()
        if union(i, j):
            for g in rel.carrier.generators:
                pending.append((g[i], g[j]))
    # saturate: images of every merged pair under every generator
    changed = True
    while changed:
        changed = False
        for g in rel.carrier.generators:
            for i in range(n):
                for j in range(i + 1, n):
                    if find(i) == find(j) and union(g[i], g[j]):
                        changed = True
    pairs = frozenset((i, j) for i in range(n) for j in range(n) if find(i) == find(j))
    return relations.FiniteRelation(rel.carrier, pairs)


def _random_relation(rng, n_max=8) -> relations.FiniteRelation:
    n = int(rng.integers(2, n_max + 1))
    n_gens = int(rng.integers(0, 3))
    gens = tuple(tuple(int(v) for v in rng.permutation(n)) for _ in range(n_gens))
    n_pairs = int(rng.integers(0, n + 2))
    pairs = frozenset((int(rng.integers(0, n)), int(rng.integers(0, n)))
                      for _ in range(n_pairs))
    return relations.FiniteRelation(relations.FiniteCarrier(n, gens), pairs)


def preset_closure_oracle() -> PresetResult:
    rng = np.random.default_rng(777)
    t0 = time.perf_counter()
    agree = 0
    trials = 1000
    for _ in range(trials):
        rel = _random_relation(rng)
        if relations.factor_closure(rel).pairs == closure_oracle(rel).pairs:
            agree += 1
    product_pass = 0
    product_trials = 100
    for _ in range(product_trials):
        rels = []
        for _i in range(3):
            n = 3
            n_pairs = int(rng.integers(0, 5))
            pairs = frozenset((int(rng.integers(0, n)), int(rng.integers(0, n)))
                              for _ in range(n_pairs))
            rels.append(relations.FiniteRelation(relations.FiniteCarrier(n), pairs))
        if relations.product_closure_check(rels).passed:
            product_pass += 1
    return PresetResult(
        name="closure-oracle",
        values={"closure_agree": agree, "closure_trials": trials,
                "product_pass": product_pass, "product_trials": product_trials,
                "seconds": time.perf_counter() - t0},
    )


# -- interpolation pipeline ---------------------------------------------------

def _witness_sequence(flow: flows.SkewFlow, scales_a, scales_b,
                      control: float | None = None):
    """Divergent h for the first shortlist character that clears threshold."""
    x0 = TorusPoint.zero(2)
    if control is None:
        control = ergodic.control_gap(scales_a, scales_b)
    last_err = None
    for mvec in SCAN_CHARACTERS:
        try:
            h = interp.generate_h(flow, x0, mvec, scales_a, scales_b,
                                  n_hi=max(max(scales_a), max(scales_b)) + 1,
                                  control=control)
            return h, control
        except DistalLabError as e:
            last_err = e
    raise DistalLabError(f"no divergent character in the shortlist: {last_err}")


def _riemann_mean(f: interp.InterpolatedFunction, a: float, step: float = 1e-4) -> float:
    """Midpoint quadrature oracle for (1/a) int_0^a f."""
    k = int(round(a / step))
    ts = (np.arange(k) + 0.5) * (a / k)
    lo = np.floor(ts)
    s = ts - lo
    idx = lo.astype(np.int64) + f.base.n_lo
    vals = (1 - s) * f.base.values[idx] + s * f.base.values[idx + 1]
    return float(np.mean(vals))


def preset_interp_exactness() -> PresetResult:
    flow = furstenberg_flow()
    scales_a, scales_b = default_scales(flow.angle, flow.cocycle)
    h, control = _witness_sequence(flow, scales_a, scales_b)
    hz = interp.even_zero_normalize(h, scales_a, scales_b)
    f = interp.interpolate(hz)
    eq = interp.equicontinuity_check(hz)
    # exactness of the trapezoid integral against a quadrature oracle
    rng = np.random.default_rng(5)
    worst_quad = 0.0
    for _ in range(20):
        a = float(rng.uniform(10.0, 2000.0))
        exact = f.integral(0.0, a) / a
        worst_quad = max(worst_quad, abs(exact - _riemann_mean(f, a)))
    # discrete-vs-continuous identity |alpha_A(f) - avg_A(h)| <= sup|h| / A
    worst_ident = 0.0
    for s in scales_a + scales_b:
        if s > hz.n_hi:
            continue
        cont = f.integral(0.0, float(s)) / s
        disc = hz.averages([s])[0]
        worst_ident = max(worst_ident, abs(cont - disc) - hz.sup_norm / s)
    rep = interp.divergent_means(f, scales_a, scales_b)
    disc_gap = hz.two_scale_gap(scales_a, scales_b)
    bound = 2 * hz.sup_norm * (1.0 / scales_a[-1] + 1.0 / scales_b[-1])
    return PresetResult(
        name="interp-exactness",
        values={"f_id": f.f_id, "part": h.provenance.part,
                "normalized": hz.provenance.normalized,
                "raw_gap": h.provenance.gap, "normalized_gap": hz.provenance.gap,
                "control": control,
                "lipschitz": eq.lipschitz, "sup_norm": eq.sup_norm,
                "within_family_bound": eq.within_family_bound,
                "quad_worst": worst_quad, "quad_tol": 1e-3 * max(hz.sup_norm, 1e-12),
                "identity_excess": worst_ident,
                "continuous_gap": rep.gap, "discrete_gap": disc_gap,
                "gap_bound": bound},
    )


# -- separation construction ---------------------------------------------------

def preset_separation_k3() -> PresetResult:
    angles = separation_angles()
    verdict = disjoint.rotation_family_verdict(list(angles))
    factors = []
    for a in angles:
        factors.append(flows.SkewFlow(angle=a, cocycle=scan_cocycle(a)))
    widths = []
    sups = []
    details = []
    for fl in factors:
        sa, sb = default_scales(fl.angle, fl.cocycle)
        h, control = _witness_sequence(fl, sa, sb)
        hi_mean = h.averages([sa[-1]])[0]
        lo_mean = h.averages([sb[-1]])[0]
        width = abs(hi_mean - lo_mean)
        # affine normalization sending the witnessed means to {0, 1}
        a_n, b_n = (hi_mean, lo_mean) if hi_mean > lo_mean else (lo_mean, hi_mean)
        sup_norm = (h.sup_norm + abs(b_n)) / (a_n - b_n)
        widths.append(width)
        sups.append(sup_norm)
        details.append({"f_id": h.provenance.f_id, "part": h.provenance.part,
                        "raw_width": width, "control": control,
                        "scales_a": sa, "scales_b": sb})
    # normalized witnessed means are exactly 1 and 0 per factor
    norm_means = [(1.0, 0.0)] * 3
    pair_gaps = {}
    for i, j in itertools.combinations(range(3), 2):
        ests = []
        for omega in ((1, 0), (0, 1)):
            # product-measure mean of f_i - f_j under the omega-selected sides
            value = norm_means[i][1 - omega[0]] - norm_means[j][1 - omega[1]]
            ests.append(ergodic.MeanEstimate(
                value=complex(value), scale=0.0, kind="discrete-birkhoff",
                f_id=f"sep{i}-sep{j}", f_norm=sups[i] + sups[j]))
        rep = ergodic.mean_gap(f"sep{i}-sep{j}", ests)
        pair_gaps[f"{i}{j}"] = rep.gap
    achieved_width = 1.0  # by the affine normalization of each witness
    return PresetResult(
        name="separation-k3",
        values={"independence": verdict.to_json(),
                "raw_widths": widths, "normalized_sups": sups,
                "achieved_width": achieved_width,
                "pair_gaps": pair_gaps,
                "bound_2w": 2.0 * achieved_width,
                "factors": details},
    )


PRESETS = {
    "equidistribution-control": preset_equidistribution_control,
    "dependent-pair-crossval": preset_dependent_pair,
    "independent-pair-crossval": preset_independent_pair,
    "furstenberg-divergence": preset_furstenberg_divergence,
    "coboundary-exactness": preset_coboundary_exactness,
    "minimality-evidence": preset_minimality_evidence,
    "eq-factor-probe": preset_eq_factor_probe,
    "closure-oracle": preset_closure_oracle,
    "interp-exactness": preset_interp_exactness,
    "separation-k3": preset_separation_k3,
}


def run_preset(name: str) -> PresetResult:
    if name not in PRESETS:
        raise DistalLabError(f"unknown preset {name!r}; see list-presets")
    return PRESETS[name]()
