"""Exact rational polynomial algebra with replayable sign certificates.

Everything in this module is computed over arbitrary-precision rationals
(`fractions.Fraction`); no floating point enters any code path.  Root counts
and sign claims are established by Sturm's theorem and packaged as
:class:`SignCertificate` records whose evidence can be re-derived bit-for-bit
from the stored polynomial and interval.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

Rational = Fraction

CLAIM_NO_ROOT = "no-root"
CLAIM_ONE_ROOT = "exactly-one-root"
CLAIM_POSITIVE = "sign-constant-positive"
CLAIM_NEGATIVE = "sign-constant-negative"
# Used by count_roots when the Sturm count exceeds one; none of the four
# claims above can express "n distinct roots" for n >= 2.
CLAIM_ROOT_COUNT = "root-count"

_COUNT_CLAIMS = (CLAIM_NO_ROOT, CLAIM_ONE_ROOT, CLAIM_ROOT_COUNT)
_SIGN_CLAIMS = (CLAIM_POSITIVE, CLAIM_NEGATIVE)


class ExactPolyError(Exception):
    """Base class for certification failures in this module."""


class DegenerateEndpointError(ExactPolyError):
    """An interval endpoint is a root and nudging could not clear it."""


class SignClaimError(ExactPolyError):
    """A requested sign claim is false; carries a rational counterexample."""

    def __init__(self, message: str, counterexample: Fraction):
        super().__init__(message)
        self.counterexample = counterexample


def rat(value) -> Fraction:
    """Parse ``value`` into an exact Fraction.

    Decimal strings such as ``"1.7075"`` become exact power-of-ten rationals
    (6830/4000 -> 683/400); ``"p/q"`` strings, ints and Fractions pass through
    exactly.  Binary floats are rejected: accepting them would contaminate
    certificates with rounding already performed by the caller.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot build an exact rational from {type(value).__name__}")


def rat_str(q: Fraction) -> str:
    """Canonical ``p/q`` serialization (denominator always explicit)."""
    return f"{q.numerator}/{q.denominator}"


def rat_approx(q: Fraction, digits: int = 12) -> str:
    """Decimal approximation, clearly marked as such, for human output."""
    return f"{float(q):.{digits}g} (approx)"


class Polynomial:
    """Dense univariate polynomial over Fraction, lowest degree first.

    Immutable.  The zero polynomial has an empty coefficient tuple and,
    by convention here, degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        cs = [rat(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls(())

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls((rat(c),))

    @classmethod
    def x(cls) -> "Polynomial":
        return cls((0, 1))

    @classmethod
    def linear(cls, a0, a1) -> "Polynomial":
        """a0 + a1*x."""
        return cls((rat(a0), rat(a1)))

    # -- structure ----------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        if self.is_zero:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        if self.is_zero:
            return "Polynomial(0)"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                terms.append(str(c))
            elif k == 1:
                terms.append(f"({c})*x")
            else:
                terms.append(f"({c})*x^{k}")
        return "Polynomial(" + " + ".join(terms) + ")"

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [Fraction(0)] * (n - len(self.coeffs))
        b = list(other.coeffs) + [Fraction(0)] * (n - len(other.coeffs))
        return Polynomial(x + y for x, y in zip(a, b))

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __neg__(self) -> "Polynomial":
        return Polynomial(-c for c in self.coeffs)

    def __mul__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if self.is_zero or other.is_zero:
            return Polynomial.zero()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative polynomial power")
        result = Polynomial.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    @staticmethod
    def _coerce(value) -> "Polynomial":
        if isinstance(value, Polynomial):
            return value
        return Polynomial.constant(rat(value))

    # -- calculus and evaluation ---------------------------------------

    def __call__(self, x) -> Fraction:
        """Exact evaluation by Horner's scheme."""
        x = rat(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Polynomial":
        if self.degree < 1:
            return Polynomial.zero()
        return Polynomial(k * c for k, c in enumerate(self.coeffs) if k >= 1)

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        """Exact Euclidean division: self = q*other + r, deg r < deg other."""
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quo = [Fraction(0)] * max(len(rem) - len(other.coeffs) + 1, 1)
        d = other.degree
        lead = other.leading
        while len(rem) - 1 >= d and any(c != 0 for c in rem):
            while rem and rem[-1] == 0:
                rem.pop()
            if len(rem) - 1 < d:
                break
            shift = len(rem) - 1 - d
            factor = rem[-1] / lead
            quo[shift] = factor
            for i, c in enumerate(other.coeffs):
                rem[shift + i] -= factor * c
            rem.pop()
        return Polynomial(quo), Polynomial(rem)

    def rem(self, other: "Polynomial") -> "Polynomial":
        return self.divmod(other)[1]

    def primitive(self) -> "Polynomial":
        """Scale by a positive rational so coefficients are coprime integers.

        The scale factor is strictly positive, so sign data (all Sturm
        evidence) is unchanged while coefficient growth along remainder
        chains stays bounded.
        """
        if self.is_zero:
            return self
        den_lcm = 1
        for c in self.coeffs:
            den_lcm = den_lcm * c.denominator // gcd(den_lcm, c.denominator)
        nums = [c.numerator * (den_lcm // c.denominator) for c in self.coeffs]
        g = 0
        for n in nums:
            g = gcd(g, abs(n))
        return Polynomial(Fraction(n // g) for n in nums)

    # -- serialization --------------------------------------------------

    def to_json(self) -> list[str]:
        return [rat_str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence[str]) -> "Polynomial":
        return cls(rat(c) for c in data)


def poly_eval(p: Polynomial, x) -> Fraction:
    """Exact value of ``p`` at a rational point."""
    return p(x)


@dataclass(frozen=True)
class IntervalQ:
    """Closed rational interval [lo, hi]."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", rat(self.lo))
        object.__setattr__(self, "hi", rat(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: {self.lo} > {self.hi}")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        x = rat(x)
        return self.lo <= x <= self.hi

    def strictly_inside(self, other: "IntervalQ") -> bool:
        return other.lo < self.lo and self.hi < other.hi

    def to_json(self) -> list[str]:
        return [rat_str(self.lo), rat_str(self.hi)]

    @classmethod
    def from_json(cls, data: Sequence[str]) -> "IntervalQ":
        return cls(rat(data[0]), rat(data[1]))


def sturm_sequence(p: Polynomial) -> list[Polynomial]:
    """Canonical Sturm chain of ``p``.

    p0 = p, p1 = p', then p_{i+1} = -rem(p_{i-1}, p_i) until the remainder
    vanishes.  Each member after p0 is reduced to its positive-primitive
    integer form, which preserves every sign and keeps coefficients small.
    A repeated root shows up as a final element of positive degree (the gcd
    of p and p').
    """
    if p.is_zero:
        raise ValueError("Sturm sequence of the zero polynomial is undefined")
    chain = [p]
    d = p.derivative()
    if d.is_zero:
        return chain
    chain.append(d.primitive())
    while True:
        r = chain[-2].rem(chain[-1])
        if r.is_zero:
            break
        chain.append((-r).primitive())
    return chain


def sign_variations(values: Sequence[Fraction]) -> int:
    """Sign changes in a sequence, zeros skipped."""
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _variations_at(chain: Sequence[Polynomial], x: Fraction) -> int:
    return sign_variations([q(x) for q in chain])


def _nudge_endpoint(p: Polynomial, x: Fraction, span: Fraction, inward: int) -> tuple[Fraction, bool]:
    """Move an endpoint off a root by shrinking rational steps.

    Steps are ``span / 10**k`` for k = 6..12, taken toward the interior
    (``inward`` is +1 for the lower endpoint, -1 for the upper).  Returns
    (possibly moved point, whether a move happened).
    """
    if p(x) != 0:
        return x, False
    for k in range(6, 13):
        candidate = x + inward * span / 10**k
        if p(candidate) != 0:
            return candidate, True
    raise DegenerateEndpointError(
        f"endpoint {x} is a root and all nudges 10^-6..10^-12 of the span hit roots"
    )


@dataclass(frozen=True)
class SignCertificate:
    """Exact-arithmetic proof record for a root-count or sign claim.

    ``evidence`` holds only ints and ``p/q`` strings, so the record is
    JSON-stable and :meth:`replay` can recompute every entry from the
    polynomial and interval and compare bit-for-bit.
    """

    polynomial: Polynomial
    interval: IntervalQ
    claim: str
    evidence: dict

    def to_json(self) -> dict:
        return {
            "polynomial": self.polynomial.to_json(),
            "interval": self.interval.to_json(),
            "claim": self.claim,
            "evidence": dict(self.evidence),
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> "SignCertificate":
        return cls(
            polynomial=Polynomial.from_json(data["polynomial"]),
            interval=IntervalQ.from_json(data["interval"]),
            claim=data["claim"],
            evidence=dict(data["evidence"]),
        )

    def replay(self) -> bool:
        """Recompute the evidence from scratch and check it verbatim."""
        try:
            expected = _recompute_evidence(self.polynomial, self.claim, self.evidence)
        except (ExactPolyError, ValueError, ZeroDivisionError, KeyError):
            return False
        if expected != self.evidence:
            return False
        lo = rat(self.evidence["lo"])
        hi = rat(self.evidence["hi"])
        return self.interval.lo <= lo <= hi <= self.interval.hi


def _recompute_evidence(p: Polynomial, claim: str, evidence: dict) -> dict:
    """Rebuild the canonical evidence dict for ``claim`` at the recorded points."""
    lo = rat(evidence["lo"])
    hi = rat(evidence["hi"])
    chain = sturm_sequence(p)
    v_lo = _variations_at(chain, lo)
    v_hi = _variations_at(chain, hi)
    value_lo = p(lo)
    value_hi = p(hi)
    count = v_lo - v_hi
    out = {
        "lo": rat_str(lo),
        "hi": rat_str(hi),
        "variations_lo": v_lo,
        "variations_hi": v_hi,
        "root_count": count,
        "value_lo": rat_str(value_lo),
        "value_hi": rat_str(value_hi),
    }
    if claim in _SIGN_CLAIMS:
        witness = rat(evidence["witness"])
        out["witness"] = rat_str(witness)
        out["witness_value"] = rat_str(p(witness))
        want_positive = claim == CLAIM_POSITIVE
        ok = count == 0 and value_lo != 0 and value_hi != 0
        for v in (value_lo, value_hi, p(witness)):
            ok = ok and ((v > 0) == want_positive)
        if not ok:
            raise SignClaimError("stored sign claim does not replay", witness)
    elif claim == CLAIM_NO_ROOT:
        if count != 0:
            raise ExactPolyError("no-root claim does not replay")
    elif claim == CLAIM_ONE_ROOT:
        if count != 1:
            raise ExactPolyError("exactly-one-root claim does not replay")
    elif claim == CLAIM_ROOT_COUNT:
        pass
    else:
        raise ValueError(f"unknown claim {claim!r}")
    return out


def _count_evidence(p: Polynomial, lo: Fraction, hi: Fraction) -> tuple[int, dict]:
    chain = sturm_sequence(p)
    v_lo = _variations_at(chain, lo)
    v_hi = _variations_at(chain, hi)
    count = v_lo - v_hi
    evidence = {
        "lo": rat_str(lo),
        "hi": rat_str(hi),
        "variations_lo": v_lo,
        "variations_hi": v_hi,
        "root_count": count,
        "value_lo": rat_str(p(lo)),
        "value_hi": rat_str(p(hi)),
    }
    return count, evidence


def count_roots(p: Polynomial, iv: IntervalQ) -> tuple[int, SignCertificate]:
    """Exact number of distinct real roots of ``p`` in the open interval.

    Endpoints that happen to be roots are nudged inward by shrinking
    rational steps (recorded in the evidence); if twelve decades of nudging
    cannot clear them the input is reported as degenerate.
    """
    if p.is_zero:
        raise ValueError("cannot count roots of the zero polynomial")
    if p.degree == 0:
        evidence = {
            "lo": rat_str(iv.lo),
            "hi": rat_str(iv.hi),
            "variations_lo": 0,
            "variations_hi": 0,
            "root_count": 0,
            "value_lo": rat_str(p(iv.lo)),
            "value_hi": rat_str(p(iv.hi)),
        }
        return 0, SignCertificate(p, iv, CLAIM_NO_ROOT, evidence)
    span = iv.width if iv.width > 0 else Fraction(1)
    lo, _ = _nudge_endpoint(p, iv.lo, span, +1)
    hi, _ = _nudge_endpoint(p, iv.hi, span, -1)
    if lo > hi:
        raise DegenerateEndpointError("nudged endpoints crossed; interval too thin")
    count, evidence = _count_evidence(p, lo, hi)
    if count == 0:
        claim = CLAIM_NO_ROOT
    elif count == 1:
        claim = CLAIM_ONE_ROOT
    else:
        claim = CLAIM_ROOT_COUNT
    return count, SignCertificate(p, iv, claim, evidence)


def _sign(v: Fraction) -> int:
    return (v > 0) - (v < 0)


def _offset_midpoint(p: Polynomial, lo: Fraction, hi: Fraction) -> Fraction:
    """Point near the middle of (lo, hi) where p does not vanish.

    A polynomial has finitely many roots, so some dyadic offset works.
    """
    span = hi - lo
    for k in range(1, 64):
        for num, den in ((1, 2), (2**k + 1, 2**(k + 1)), (2**k - 1, 2**(k + 1))):
            m = lo + span * Fraction(num, den)
            if lo < m < hi and p(m) != 0:
                return m
    raise ExactPolyError("could not find a non-root interior point")


def isolate_root(p: Polynomial, iv: IntervalQ, width) -> tuple[IntervalQ, SignCertificate]:
    """Shrink an interval known to contain exactly one root of ``p``.

    Exact bisection down to the requested width; the returned enclosure has
    endpoints of exactly opposite sign, so p(lo)*p(hi) < 0 as rationals.
    """
    width = rat(width)
    if width <= 0:
        raise ValueError("isolation width must be positive")
    count, _ = count_roots(p, iv)
    if count != 1:
        raise ValueError(f"isolate_root requires exactly one root in the interval, found {count}")
    span = iv.width if iv.width > 0 else Fraction(1)
    lo, _ = _nudge_endpoint(p, iv.lo, span, +1)
    hi, _ = _nudge_endpoint(p, iv.hi, span, -1)
    s_lo, s_hi = _sign(p(lo)), _sign(p(hi))
    if s_lo == s_hi:
        raise ExactPolyError(
            "single root without endpoint sign change (even multiplicity); "
            "cannot certify an enclosure by signs"
        )
    while hi - lo > width:
        mid = (lo + hi) / 2
        if p(mid) == 0:
            mid = _offset_midpoint(p, lo, hi)
        if _sign(p(mid)) == s_lo:
            lo = mid
        else:
            hi = mid
    count, evidence = _count_evidence(p, lo, hi)
    if count != 1:
        raise ExactPolyError("bisection lost the root (inconsistent Sturm data)")
    enclosure = IntervalQ(lo, hi)
    return enclosure, SignCertificate(p, enclosure, CLAIM_ONE_ROOT, evidence)


def _find_counterexample(p: Polynomial, iv: IntervalQ, want_positive: bool) -> Fraction:
    """Locate a rational point in [lo, hi] violating the requested sign."""
    for n in (2, 16, 128, 1024, 8192):
        for k in range(n + 1):
            x = iv.lo + iv.width * Fraction(k, n)
            v = p(x)
            if v == 0 or (v > 0) != want_positive:
                return x
    raise ExactPolyError("sign claim is false but no counterexample was located")


def certify_sign_on_interval(p: Polynomial, iv: IntervalQ, sign: str) -> SignCertificate:
    """Certificate that ``p`` keeps a strict sign on the whole closed interval.

    Evidence: zero roots in the interior by Sturm count, plus exact
    evaluations of the stated sign at both endpoints and one interior point.
    Raises :class:`SignClaimError` carrying a rational counterexample when
    the claim is false.
    """
    if sign not in ("positive", "negative"):
        raise ValueError("sign must be 'positive' or 'negative'")
    want_positive = sign == "positive"
    claim = CLAIM_POSITIVE if want_positive else CLAIM_NEGATIVE

    def _check(v: Fraction) -> bool:
        return v != 0 and (v > 0) == want_positive

    if p.is_zero:
        raise SignClaimError("zero polynomial has no strict sign", iv.lo)
    value_lo, value_hi = p(iv.lo), p(iv.hi)
    if not _check(value_lo):
        raise SignClaimError(f"claimed {sign} but p({iv.lo}) = {value_lo}", iv.lo)
    if not _check(value_hi):
        raise SignClaimError(f"claimed {sign} but p({iv.hi}) = {value_hi}", iv.hi)
    if iv.width == 0:
        witness = iv.lo
    else:
        witness = _offset_midpoint(p, iv.lo, iv.hi)
    if not _check(p(witness)):
        raise SignClaimError(f"claimed {sign} but p({witness}) = {p(witness)}", witness)
    count, evidence = _count_evidence(p, iv.lo, iv.hi)
    if count != 0:
        raise SignClaimError(
            f"claimed {sign} but Sturm finds {count} interior root(s)",
            _find_counterexample(p, iv, want_positive),
        )
    evidence["witness"] = rat_str(witness)
    evidence["witness_value"] = rat_str(p(witness))
    return SignCertificate(p, iv, claim, evidence)
