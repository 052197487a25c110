"""Exact torus arithmetic and the number theory of rotation angles.

The circle is carried on a 2^-128 lattice: a point is an unsigned 128-bit
integer ``raw`` read as ``raw / 2^128 in [0, 1)``.  Addition wraps, so orbit
arithmetic is exact over any orbit length; there is no floating drift to
budget for.  Angles keep, next to their lattice quantization, the exact
rational value of their decimal string, a continued-fraction expansion and
the convergent table that every other module leans on.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DistalLabError, PrecisionError, RationalAngleError

FRAC_BITS = 128
FRAC_MOD = 1 << FRAC_BITS
_HALF = Fraction(1, 2)

#: smallest number of fractional digits accepted for an angle's decimal string
MIN_ANGLE_DIGITS = 40

_DECIMAL_RE = re.compile(r"^0?\.(\d+)$")


# ---------------------------------------------------------------------------
# lattice points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Frac128:
    """A point of the circle, stored as raw/2^128 in [0, 1)."""

    raw: int

    def __post_init__(self):
        if not 0 <= self.raw < FRAC_MOD:
            object.__setattr__(self, "raw", self.raw % FRAC_MOD)

    @classmethod
    def from_fraction(cls, value: Fraction) -> "Frac128":
        """Round an exact rational to the nearest lattice point (mod 1)."""
        value = value % 1
        scaled = value * FRAC_MOD
        raw = (scaled.numerator + scaled.denominator // 2) // scaled.denominator
        return cls(raw % FRAC_MOD)

    @classmethod
    def from_float(cls, value: float) -> "Frac128":
        return cls.from_fraction(Fraction(value) % 1)

    @classmethod
    def from_hex(cls, text: str) -> "Frac128":
        if len(text) != 32:
            raise DistalLabError(f"Frac128 hex literal must have 32 digits, got {text!r}")
        return cls(int(text, 16))

    def to_hex(self) -> str:
        return f"{self.raw:032x}"

    def to_fraction(self) -> Fraction:
        return Fraction(self.raw, FRAC_MOD)

    def to_float(self) -> float:
        # hi word only; 2^-64 resolution is far below every probe tolerance
        return (self.raw >> 64) * 2.0 ** -64

    @property
    def hi(self) -> int:
        return self.raw >> 64

    @property
    def lo(self) -> int:
        return self.raw & ((1 << 64) - 1)

    def __add__(self, other: "Frac128") -> "Frac128":
        return Frac128((self.raw + other.raw) % FRAC_MOD)

    def __sub__(self, other: "Frac128") -> "Frac128":
        return Frac128((self.raw - other.raw) % FRAC_MOD)

    def __neg__(self) -> "Frac128":
        return Frac128((-self.raw) % FRAC_MOD)

    def scaled(self, n: int) -> "Frac128":
        """n-fold multiple on the circle, exact in the lattice."""
        return Frac128((self.raw * n) % FRAC_MOD)

    def distance(self, other: "Frac128") -> Fraction:
        """Exact torus distance min(|d|, 1-|d|)."""
        d = (self.raw - other.raw) % FRAC_MOD
        d = min(d, FRAC_MOD - d)
        return Fraction(d, FRAC_MOD)


def frac_add(a: Frac128, b: Frac128) -> Frac128:
    """Group law on the circle: (a + b) mod 1, exact on the lattice."""
    return a + b


@dataclass(frozen=True)
class TorusPoint:
    """An ordered tuple of circle coordinates; equality is raw-word equality."""

    coords: tuple[Frac128, ...]

    def __post_init__(self):
        if isinstance(self.coords, list):
            object.__setattr__(self, "coords", tuple(self.coords))
        if len(self.coords) < 1:
            raise DistalLabError("TorusPoint needs dimension >= 1")

    @classmethod
    def from_floats(cls, values: Iterable[float]) -> "TorusPoint":
        return cls(tuple(Frac128.from_float(v) for v in values))

    @classmethod
    def zero(cls, dim: int) -> "TorusPoint":
        return cls(tuple(Frac128(0) for _ in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def distance(self, other: "TorusPoint") -> Fraction:
        """Sup metric over coordinates, exact."""
        if self.dim != other.dim:
            raise DistalLabError("dimension mismatch in distance")
        return max(a.distance(b) for a, b in zip(self.coords, other.coords))

    def to_floats(self) -> tuple[float, ...]:
        return tuple(c.to_float() for c in self.coords)


# ---------------------------------------------------------------------------
# continued fractions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BestApproxError:
    """Distance from q_k * alpha to the nearest integer, with its index."""

    k: int
    q: int
    dist: float


@dataclass(frozen=True)
class RotationAngle:
    """An irrational rotation angle with its approximation ladder.

    ``decimal`` is the defining string; ``model`` is its exact rational value
    (possibly carrying extra hidden digits for series-defined angles, see
    :func:`liouville_angle`).  ``convergents`` hold (p_k, q_k) pairs of the
    continued fraction, and all best-approximation claims are made relative
    to ``model``.
    """

    decimal: str
    frac: Frac128
    cf: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...]
    model: Fraction = field(repr=False)
    warning: str | None = None

    @property
    def value(self) -> Fraction:
        return self.model

    def float_value(self) -> float:
        return float(self.model)

    def approx_dist(self, q: int) -> Fraction:
        """Exact ||q * alpha|| (distance from q*alpha to the nearest integer)."""
        t = (q * self.model) % 1
        return t if t <= _HALF else 1 - t

    def signed_drift(self, q: int) -> Fraction:
        """q*alpha mod 1 folded to (-1/2, 1/2]; the per-step drift of q x_n."""
        t = (q * self.model) % 1
        return t if t <= _HALF else t - 1

    def best_approx_errors(self) -> list[BestApproxError]:
        return [
            BestApproxError(k=k, q=q, dist=float(self.approx_dist(q)))
            for k, (_p, q) in enumerate(self.convergents)
        ]

    def to_json(self) -> dict:
        return {
            "decimal": self.decimal,
            "cf": list(self.cf),
            "convergents": [[p, q] for p, q in self.convergents],
        }

    @classmethod
    def from_json(cls, data: dict) -> "RotationAngle":
        model = _parse_decimal(data["decimal"])
        return cls(
            decimal=data["decimal"],
            frac=Frac128.from_fraction(model),
            cf=tuple(data["cf"]),
            convergents=tuple((p, q) for p, q in data["convergents"]),
            model=model,
        )


def _parse_decimal(text: str) -> Fraction:
    m = _DECIMAL_RE.match(text.strip())
    if not m:
        raise DistalLabError(f"angle decimal must look like 0.ddd..., got {text!r}")
    digits = m.group(1)
    return Fraction(int(digits), 10 ** len(digits))


def _cf_exact(x: Fraction, limit: int = 100000) -> list[int]:
    """Terminating continued fraction of an exact rational."""
    out = []
    for _ in range(limit):
        a = x.numerator // x.denominator
        out.append(a)
        x = x - a
        if x == 0:
            break
        x = 1 / x
    return out


def _cf_interval(lo: Fraction, hi: Fraction, limit: int = 100000) -> list[int]:
    """Partial quotients shared by every value in [lo, hi].

    Expansion stops at the first quotient the interval does not determine,
    which is also where a termination inside the interval becomes visible.
    """
    out = []
    for _ in range(limit):
        a_lo = lo.numerator // lo.denominator
        a_hi = hi.numerator // hi.denominator
        if a_lo != a_hi:
            break
        out.append(a_lo)
        lo -= a_lo
        hi -= a_hi
        if lo == 0 or hi == 0:
            break
        # reciprocal reverses the order
        lo, hi = 1 / hi, 1 / lo
    return out


def _convergents(cf: Sequence[int]) -> list[tuple[int, int]]:
    res = []
    p1, p2, q1, q2 = 1, 0, 0, 1
    for a in cf:
        p = a * p1 + p2
        q = a * q1 + q2
        res.append((p, q))
        p1, p2 = p, p1
        q1, q2 = q, q1
    return res


def _check_ladder(model: Fraction, convergents: Sequence[tuple[int, int]]) -> None:
    """Enforce the best-approximation identities on a stored ladder."""
    for k in range(len(convergents) - 1):
        p, q = convergents[k]
        _pn, qn = convergents[k + 1]
        if abs(model - Fraction(p, q)) >= Fraction(1, q * qn):
            raise PrecisionError(f"convergent {p}/{q} violates the 1/(q_k q_k+1) bound")
        if k >= 1 and qn <= q:
            raise PrecisionError("convergent denominators must increase")
    for k in range(1, len(convergents)):
        p, q = convergents[k]
        pp, qp = convergents[k - 1]
        if q * pp - p * qp not in (1, -1):
            raise PrecisionError("determinant of consecutive convergents is not +-1")


def continued_fraction(decimal: str, K: int) -> RotationAngle:
    """Expand a decimal angle to K convergents, or reject it as rational.

    The input carries an implicit uncertainty of one unit in its last digit;
    only partial quotients forced by the whole uncertainty interval are
    emitted.  If the expansion terminates inside the interval (the input is,
    to within its own precision, a low-denominator rational), the angle is
    rejected.
    """
    if K < 1:
        raise DistalLabError("K must be >= 1")
    m = _DECIMAL_RE.match(decimal.strip())
    if not m:
        raise DistalLabError(f"angle decimal must look like 0.ddd..., got {decimal!r}")
    digits = len(m.group(1))
    if digits < MIN_ANGLE_DIGITS:
        raise DistalLabError(f"angle decimal needs >= {MIN_ANGLE_DIGITS} digits, got {digits}")
    x = _parse_decimal(decimal)
    if not 0 < x < 1:
        raise DistalLabError("angle must lie in (0, 1)")
    u = Fraction(1, 10 ** digits)
    common = _cf_interval(x - u, x + u)
    exact = _cf_exact(x)
    if len(exact) <= len(common) + 2:
        # the interval straddles the terminating rational itself
        raise RationalAngleError(
            f"rational angle: {decimal[:24]}... terminates after {len(exact)} quotients"
        )
    if len(common) < K:
        raise PrecisionError(
            f"only {len(common)} partial quotients are certain at {digits} digits; "
            f"{K} were requested"
        )
    cf = tuple(common[:K])
    conv = tuple(_convergents(cf))
    _check_ladder(x, conv)
    return RotationAngle(decimal=decimal, frac=Frac128.from_fraction(x), cf=cf,
                         convergents=conv, model=x)


# ---------------------------------------------------------------------------
# series-defined angles
# ---------------------------------------------------------------------------

def _decimal_of(value: Fraction, digits: int) -> str:
    scaled = value * 10 ** digits
    if scaled.denominator != 1:
        scaled = Fraction(scaled.numerator // scaled.denominator, 1)
    return "0." + str(scaled.numerator).rjust(digits, "0")


def liouville_angle(terms: int) -> RotationAngle:
    """Angle of the factorial series sum_{k<=terms} 10^(-k!) with its tail.

    The returned angle models the infinite series: the convergent ladder is
    extracted from the series extended by one more term, so the stored
    approximation data is valid for the full series, and the ladder is cut at
    denominator 10^(terms!).  Two terms leave no tail resolvable beyond the
    truncation's own denominator, so the value degenerates to the rational
    it literally is.
    """
    if not 2 <= terms <= 6:
        raise PrecisionError("liouville_angle supports 2 <= terms <= 6")
    if terms == 2:
        raise RationalAngleError(
            "rational angle: the two-term truncation 0.11 carries no usable tail; "
            "use terms >= 3"
        )
    trunc = sum(Fraction(1, 10 ** math.factorial(k)) for k in range(1, terms + 1))
    model = trunc + Fraction(1, 10 ** math.factorial(terms + 1))
    digits = max(MIN_ANGLE_DIGITS, 2 * math.factorial(terms))
    cap = 10 ** math.factorial(terms)
    tail_unit = Fraction(1, 10 ** math.factorial(terms + 2))
    common = _cf_interval(model - tail_unit, model + tail_unit)
    conv_all = _convergents(common)
    keep = 0
    while keep < len(conv_all) and conv_all[keep][1] <= cap:
        keep += 1
    cf = tuple(common[:keep])
    conv = tuple(conv_all[:keep])
    _check_ladder(model, conv)
    return RotationAngle(
        decimal=_decimal_of(model, digits),
        frac=Frac128.from_fraction(model),
        cf=cf,
        convergents=conv,
        model=model,
    )


def sparse_power_angle(base: int, exponents: Sequence[int], extra: int | None = None) -> RotationAngle:
    """Angle sum_k base^(-e_k) for a strictly increasing exponent list.

    Same tail convention as :func:`liouville_angle`: one hidden extra term
    (default: last gap repeated, doubled) keeps the ladder honest for the
    infinite object, and convergents are cut at base^(max e).
    """
    exps = list(exponents)
    if base < 2 or len(exps) < 3 or any(b <= a for a, b in zip(exps, exps[1:])):
        raise DistalLabError("need base >= 2 and >= 3 strictly increasing exponents")
    if extra is None:
        extra = exps[-1] + 2 * (exps[-1] - exps[-2])
    trunc = sum(Fraction(1, base ** e) for e in exps)
    model = trunc + Fraction(1, base ** extra)
    digits = max(MIN_ANGLE_DIGITS, math.ceil(exps[-1] * math.log10(base)) + 10)
    cap = base ** exps[-1]
    tail_unit = Fraction(1, base ** (extra + (extra - exps[-1])))
    common = _cf_interval(model - tail_unit, model + tail_unit)
    conv_all = _convergents(common)
    keep = 0
    while keep < len(conv_all) and conv_all[keep][1] <= cap:
        keep += 1
    cf = tuple(common[:keep])
    conv = tuple(conv_all[:keep])
    _check_ladder(model, conv)
    return RotationAngle(
        decimal=_decimal_of(model, digits),
        frac=Frac128.from_fraction(model),
        cf=cf,
        convergents=conv,
        model=model,
    )


# ---------------------------------------------------------------------------
# named angles
# ---------------------------------------------------------------------------

_NAMED_DIGITS = 60


def _surd_decimal(n: int, shift: int, digits: int) -> str:
    """Decimal string of sqrt(n) - shift via integer square root."""
    scaled = 10 ** (2 * digits) * n
    root = math.isqrt(scaled)
    value = Fraction(root, 10 ** digits) - shift
    return _decimal_of(value, digits)


def named_angle(name: str, K: int = 12) -> RotationAngle:
    """Resolve a named angle from the built-in library."""
    name = name.strip().lower()
    if name in ("golden", "phi"):
        root5 = Fraction(math.isqrt(5 * 10 ** (2 * _NAMED_DIGITS)), 10 ** _NAMED_DIGITS)
        return continued_fraction(_decimal_of((root5 - 1) / 2, _NAMED_DIGITS), K)
    if name in ("sqrt2-1", "sqrt2m1"):
        return continued_fraction(_surd_decimal(2, 1, _NAMED_DIGITS), K)
    if name in ("sqrt3-1", "sqrt3m1"):
        return continued_fraction(_surd_decimal(3, 1, _NAMED_DIGITS), K)
    if name in ("sqrt5-2", "sqrt5m2"):
        return continued_fraction(_surd_decimal(5, 2, _NAMED_DIGITS), K)
    if name.startswith("liouville"):
        return liouville_angle(int(name.removeprefix("liouville")))
    raise DistalLabError(f"unknown angle name {name!r}")


def doubled_angle(angle: RotationAngle, K: int = 8) -> RotationAngle:
    """The angle 2*alpha (mod 1) as a fresh decimal-defined angle."""
    doubled = (2 * angle.model) % 1
    digits = max(MIN_ANGLE_DIGITS, len(angle.decimal) - 2)
    return continued_fraction(_decimal_of(doubled, digits), K)
