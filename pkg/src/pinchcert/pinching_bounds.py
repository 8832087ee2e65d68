"""Closed-form pinching bounds and certificate polynomials, all exact.

The pinching domain for the third gap is the closed interval
[5/3, 9/5] of values of S, the squared norm of the second fundamental
form.  Every constructor here returns exact rationals or rational-coefficient
polynomials; callers certify sign facts about them with
:mod:`pinchcert.exact_poly`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .exact_poly import (
    IntervalQ,
    Polynomial,
    SignCertificate,
    certify_sign_on_interval,
    rat,
    rat_str,
)

F = Fraction

#: Domain of the third-gap pinching hypotheses: S(3) <= S <= S(4).
PINCH_DOMAIN = IntervalQ(F(5, 3), F(9, 5))

_X = Polynomial.x()


@dataclass(frozen=True)
class CalabiValue:
    """Curvature data of the constant-curvature minimal 2-sphere of degree s."""

    s: int
    K: Fraction
    S: Fraction
    ambient_dim: int


def calabi_value(s: int) -> CalabiValue:
    """Exact K(s) = 2/(s(s+1)) and S(s) = 2(s-1)(s+2)/(s(s+1)) with 2K = 2 - S."""
    if s < 1:
        raise ValueError(f"harmonic degree must be >= 1, got {s}")
    K = F(2, s * (s + 1))
    S = F(2 * (s - 1) * (s + 2), s * (s + 1))
    return CalabiValue(s=s, K=K, S=S, ambient_dim=2 * s)


def theta1() -> Polynomial:
    """Expanded cubic certificate for the lower pinching endpoint.

    x(3x-4)(5x-9) + (5/36)(3x-5)((11/4)x + 151/60)^2; its unique root in the
    pinching domain is the threshold 1.7075... below which the lower-endpoint
    rigidity holds.
    """
    first = _X * (3 * _X - 4) * (5 * _X - 9)
    inner = Polynomial.linear(F(151, 60), F(11, 4))
    second = F(5, 36) * (3 * _X - 5) * inner * inner
    return first + second


def theta2(t) -> Polynomial:
    """Cubic certificate for the upper pinching endpoint, parameter t in (0, 1/2].

    40t(2t-1) x(3x-4)(3x-5) + ((9/5)t + 36/5)^2 (9 - 5x); for t < 1/2 it is
    strictly decreasing on the pinching domain with one sign change, and its
    root is the threshold above which the upper-endpoint rigidity holds.
    """
    t = rat(t)
    if not 0 < t <= F(1, 2):
        raise ValueError(f"parameter t must satisfy 0 < t <= 1/2, got {t}")
    first = (40 * t * (2 * t - 1)) * _X * (3 * _X - 4) * (3 * _X - 5)
    amp = (F(9, 5) * t + F(36, 5)) ** 2
    second = amp * Polynomial.linear(9, -5)
    return first + second


def gap_numerator() -> Polynomial:
    """N(x) = 12x(9-5x)(3x-4) = -180x^3 + 564x^2 - 432x."""
    return 12 * _X * Polynomial.linear(9, -5) * (3 * _X - 4)


def gap_denominator() -> Polynomial:
    """D(x) = 60x(3x-4) + 5((19/4)x - 9/20)^2."""
    sq = Polynomial.linear(F(-9, 20), F(19, 4))
    return 60 * _X * (3 * _X - 4) + 5 * sq * sq


def gap_derivative_numerator() -> Polynomial:
    """N'D - N D', the numerator of the derivative of the gap bound.

    Certified negative on the pinching domain, so the gap bound is strictly
    decreasing there.
    """
    n = gap_numerator()
    d = gap_denominator()
    return n.derivative() * d - n * d.derivative()


def _require_domain(x: Fraction, name: str) -> Fraction:
    if not PINCH_DOMAIN.contains(x):
        raise ValueError(f"{name} = {x} outside the pinching domain [5/3, 9/5]")
    return x


@lru_cache(maxsize=None)
def denominator_positive_certificate() -> SignCertificate:
    """One-time certificate that the gap denominator never vanishes on the domain."""
    return certify_sign_on_interval(gap_denominator(), PINCH_DOMAIN, "positive")


def gap_lower_bound(s_min) -> Fraction:
    """Certified lower bound for the oscillation of S when the pinching holds.

    12 s(9-5s)(3s-4) / (60 s(3s-4) + 5((19/4)s - 9/20)^2), exact.
    """
    s_min = _require_domain(rat(s_min), "S_min")
    denominator_positive_certificate()
    return gap_numerator()(s_min) / gap_denominator()(s_min)


@lru_cache(maxsize=None)
def legacy_radicand_certificate() -> SignCertificate:
    """One-time certificate that the legacy radicand stays positive on the domain."""
    return certify_sign_on_interval(_legacy_radicand_poly(), PINCH_DOMAIN, "positive")


def _legacy_radicand_poly() -> Polynomial:
    base = Polynomial.linear(134, -114)
    return base * base + 864 * (3 * _X - 5) * Polynomial.linear(9, -5)


@dataclass(frozen=True)
class LegacyGapBound:
    """Earlier oscillation bound (134 - 114s + sqrt(F))/108, kept square-root free.

    The value is ``rational_part + sqrt(radicand)``; both fields are exact,
    so comparisons against rational quantities square instead of taking roots.
    """

    rational_part: Fraction
    radicand: Fraction
    radicand_unscaled: Fraction  # the quantity under the radical before /108^2

    def is_zero(self) -> bool:
        return self.rational_part <= 0 and self.radicand == self.rational_part**2

    def compare_to(self, other) -> int:
        """Sign of (self - other) for rational ``other``; exact via squaring."""
        other = rat(other)
        # self - other = sqrt(radicand) - d with d = other - rational_part
        d = other - self.rational_part
        if d < 0:
            return 1
        if self.radicand > d * d:
            return 1
        if self.radicand == d * d:
            return 0
        return -1

    def approx(self) -> float:
        return float(self.rational_part) + float(self.radicand) ** 0.5


def legacy_gap_bound(s_min) -> LegacyGapBound:
    """Legacy oscillation bound, exact; degenerates to 0 at both endpoints."""
    s_min = _require_domain(rat(s_min), "S_min")
    radicand_unscaled = _legacy_radicand_poly()(s_min)
    if radicand_unscaled < 0:
        raise ValueError(f"negative radicand {radicand_unscaled} (outside certified domain)")
    legacy_radicand_certificate()
    a = (134 - 114 * s_min) / 108
    return LegacyGapBound(
        rational_part=a,
        radicand=radicand_unscaled / 108**2,
        radicand_unscaled=radicand_unscaled,
    )


def compare_legacy_to_new(s_min) -> int:
    """-1 when the new gap bound beats the legacy one, 0 on ties, +1 otherwise."""
    s_min = rat(s_min)
    return legacy_gap_bound(s_min).compare_to(gap_lower_bound(s_min))


def smax_threshold(w) -> Fraction:
    """Supremum threshold: no pinched immersion has S_max below this value.

    (108 w(3w-4) + 5w((19/4)w - 9/20)^2) / (60 w(3w-4) + 5((19/4)w - 9/20)^2),
    evaluated directly; equals w + gap_lower_bound(w) identically.
    """
    w = _require_domain(rat(w), "w")
    denominator_positive_certificate()
    sq = Polynomial.linear(F(-9, 20), F(19, 4))
    numerator = 108 * _X * (3 * _X - 4) + 5 * _X * sq * sq
    return numerator(w) / gap_denominator()(w)


def middleref_value(x, w) -> Fraction:
    """The t = 1/2 endpoint certificate in closed form.

    x(3x-4)(3x-5)(5x-9) + (5/4)(w-x)^2 ((11/4)x + (19/4)w - 27/5)^2.
    Negative values rule x out as the supremum of S under the pinching
    hypothesis with weight w.
    """
    x, w = rat(x), rat(w)
    first = x * (3 * x - 4) * (3 * x - 5) * (5 * x - 9)
    inner = F(11, 4) * x + F(19, 4) * w - F(27, 5)
    return first + F(5, 4) * (w - x) ** 2 * inner**2


def weight_linear_coeffs(x, w, t) -> tuple[Fraction, Fraction]:
    """Coefficients (c1, c0) of the linear weight q(S) = c1*S + c0.

    q is the factor whose square, divided by S, is maximized when bounding
    the Laplacian term; c1 = (2+15t)/2 and c0 = c1*w + 36/5 - 2x - (126/5)t.
    """
    x, w, t = rat(x), rat(w), rat(t)
    c1 = (2 + 15 * t) / 2
    c0 = c1 * w + F(36, 5) - 2 * x - F(126, 5) * t
    return c1, c0


def weight_sup_over_s(x, w, t) -> Fraction:
    """Exact supremum of q(S)^2 * x / S over S in [5/3, x].

    The derivative numerator factors as (c1 S + c0)(c1 S - c0), so the only
    interior critical points are S = +-c0/c1; the supremum is attained at a
    rational candidate and is returned exactly.
    """
    x, w, t = rat(x), rat(w), rat(t)
    c1, c0 = weight_linear_coeffs(x, w, t)
    candidates = [F(5, 3), x]
    if c1 != 0:
        crit = c0 / c1
        if F(5, 3) <= crit <= x:
            candidates.append(crit)
    best = None
    for s in candidates:
        q = c1 * s + c0
        g = q * q * x / s
        if best is None or g > best:
            best = g
    return best


def left_certificate(x, w, t) -> Fraction:
    """Generalized lower-endpoint certificate with free parameters (w, t).

    16t(1-t) x(3x-4)(3x-5)(5x-9) + 5(w-x)^2 * M(x,w,t) where M is the exact
    supremum of q(S)^2 x/S over S in [5/3, x].  A negative value proves x is
    not attainable as the supremum of S under the pinching hypothesis.  At
    t = 1/2 this equals 4 * middleref_value(x, w) whenever the supremum sits
    at S = x, which holds throughout the domain of interest.
    """
    x, w, t = rat(x), rat(w), rat(t)
    if not 0 < t <= F(1, 2):
        raise ValueError(f"parameter t must satisfy 0 < t <= 1/2, got {t}")
    if not F(5, 3) <= w <= x <= F(9, 5):
        raise ValueError(f"need 5/3 <= w <= x <= 9/5, got w={w}, x={x}")
    common = 16 * t * (1 - t) * x * (3 * x - 4) * (3 * x - 5) * (5 * x - 9)
    return common + 5 * (w - x) ** 2 * weight_sup_over_s(x, w, t)


@dataclass(frozen=True)
class ThresholdReport:
    """Human- and machine-readable record of one certified threshold."""

    name: str
    certificates: tuple[SignCertificate, ...]
    root_enclosure: IntervalQ | None
    parameters: dict = field(default_factory=dict)
    conclusion: str = ""

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "certificates": [c.to_json() for c in self.certificates],
            "root_enclosure": self.root_enclosure.to_json() if self.root_enclosure else None,
            "parameters": {k: rat_str(rat(v)) for k, v in self.parameters.items()},
            "conclusion": self.conclusion,
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def render_markdown_table(reports: list[ThresholdReport]) -> str:
    """Markdown certification table, one row per threshold report."""
    lines = [
        "| threshold | parameters | enclosure | conclusion |",
        "|---|---|---|---|",
    ]
    for r in reports:
        params = ", ".join(f"{k}={rat_str(rat(v))}" for k, v in sorted(r.parameters.items()))
        if r.root_enclosure is not None:
            enc = f"[{rat_str(r.root_enclosure.lo)}, {rat_str(r.root_enclosure.hi)}]"
            enc += f" ~ [{float(r.root_enclosure.lo):.6f}, {float(r.root_enclosure.hi):.6f}] (approx)"
        else:
            enc = "-"
        lines.append(f"| {r.name} | {params or '-'} | {enc} | {r.conclusion} |")
    return "\n".join(lines)
