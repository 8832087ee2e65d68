"""Deterministic sweeps over the free certificate parameters (w, t).

For the lower endpoint the certificate value at a probe x is

    phi(x) = 16 t (1-t) x (3x-4)(3x-5)(5x-9) + 5 (w-x)^2 M(x, w, t),

where M is the exact supremum of q(S)^2 x / S over S in [5/3, x].  Because
the supremum is attained at one of finitely many rational candidates, phi is
the pointwise maximum of at most three polynomial "branches"; the threshold
(the largest x below which phi is negative) is therefore the smallest
first root over the branches, which Sturm machinery encloses exactly.

For the upper endpoint the certificate is a single cubic, so its root is
isolated directly.

Every probe, comparison and bisection step is exact rational arithmetic;
identical configurations produce bit-identical results.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from . import pinching_bounds as pb
from .exact_poly import (
    CLAIM_ONE_ROOT,
    CLAIM_NO_ROOT,
    ExactPolyError,
    IntervalQ,
    Polynomial,
    SignCertificate,
    _count_evidence,
    _offset_midpoint,
    certify_sign_on_interval,
    count_roots,
    isolate_root,
    rat,
    rat_str,
    sturm_sequence,
    sign_variations,
)

F = Fraction

_X = Polynomial.x()

DOMAIN_LO = pb.PINCH_DOMAIN.lo
DOMAIN_HI = pb.PINCH_DOMAIN.hi


@dataclass(frozen=True)
class SweepConfig:
    """Grids and control knobs of one deterministic sweep."""

    t_grid: tuple[Fraction, ...]
    w_grid: tuple[Fraction, ...]
    refinement_rounds: int = 0
    isolation_width: Fraction = F(1, 10**6)

    def __post_init__(self):
        t_grid = tuple(rat(t) for t in self.t_grid)
        w_grid = tuple(rat(w) for w in self.w_grid)
        object.__setattr__(self, "t_grid", t_grid)
        object.__setattr__(self, "w_grid", w_grid)
        object.__setattr__(self, "isolation_width", rat(self.isolation_width))
        if not t_grid or not w_grid:
            raise ValueError("grids must be nonempty")
        if list(t_grid) != sorted(t_grid) or list(w_grid) != sorted(w_grid):
            raise ValueError("grids must be sorted ascending")
        if not all(0 < t <= F(1, 2) for t in t_grid):
            raise ValueError("t grid must lie in (0, 1/2]")
        if not all(DOMAIN_LO <= w <= DOMAIN_HI for w in w_grid):
            raise ValueError("w grid must lie in [5/3, 9/5]")
        if self.refinement_rounds < 0:
            raise ValueError("refinement_rounds must be nonnegative")
        if self.isolation_width <= 0:
            raise ValueError("isolation width must be positive")

    def to_json(self) -> dict:
        return {
            "t_grid": [rat_str(t) for t in self.t_grid],
            "w_grid": [rat_str(w) for w in self.w_grid],
            "refinement_rounds": self.refinement_rounds,
            "isolation_width": rat_str(self.isolation_width),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SweepConfig":
        return cls(
            t_grid=tuple(rat(t) for t in data["t_grid"]),
            w_grid=tuple(rat(w) for w in data["w_grid"]),
            refinement_rounds=int(data.get("refinement_rounds", 0)),
            isolation_width=rat(data.get("isolation_width", F(1, 10**6))),
        )


def default_config(side: str, refinement_rounds: int = 2) -> SweepConfig:
    """Default grids: t in {k/200}, w in {5/3 + k*(2/15)/100}."""
    t_grid = tuple(F(k, 200) for k in range(1, 101))
    if side == "left":
        w_grid = tuple(DOMAIN_LO + F(k, 100) * F(2, 15) for k in range(101))
    elif side == "right":
        w_grid = (DOMAIN_HI,)  # the upper-endpoint argument fixes w = 9/5
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return SweepConfig(t_grid=t_grid, w_grid=w_grid, refinement_rounds=refinement_rounds)


@dataclass(frozen=True)
class ThresholdEnclosure:
    """Certified enclosure of one endpoint threshold at fixed parameters."""

    side: str
    t: Fraction
    w: Fraction
    enclosure: IntervalQ
    certificate: SignCertificate
    degenerate: bool
    support: tuple[SignCertificate, ...] = ()
    phi_lo: Fraction | None = None
    phi_hi: Fraction | None = None

    def to_json(self) -> dict:
        return {
            "side": self.side,
            "t": rat_str(self.t),
            "w": rat_str(self.w),
            "enclosure": self.enclosure.to_json(),
            "degenerate": self.degenerate,
            "certificate": self.certificate.to_json(),
            "support": [c.to_json() for c in self.support],
            "phi_lo": rat_str(self.phi_lo) if self.phi_lo is not None else None,
            "phi_hi": rat_str(self.phi_hi) if self.phi_hi is not None else None,
        }


class _RootCounter:
    """Sturm chain cached once per polynomial, for repeated range counts."""

    def __init__(self, p: Polynomial):
        self.p = p
        self.chain = sturm_sequence(p)

    def variations(self, x: Fraction) -> int:
        return sign_variations([q(x) for q in self.chain])

    def count(self, lo: Fraction, hi: Fraction) -> int:
        """Distinct roots in (lo, hi); endpoints must not be roots."""
        return self.variations(lo) - self.variations(hi)


def left_branch_polynomials(w, t) -> list[tuple[str, Polynomial, IntervalQ]]:
    """Polynomial branches of the lower-endpoint certificate.

    Returns (label, polynomial, applicability interval) triples; the
    certificate value at x is the max of the applicable branch values.
    The two endpoint branches (supremum at S = 5/3 and at S = x) cover the
    whole domain; the interior critical branch exists only where the
    stationary point c0(x)/c1 falls inside [5/3, x].
    """
    w, t = rat(w), rat(t)
    c1 = (2 + 15 * t) / 2
    k0 = c1 * w + F(36, 5) - F(126, 5) * t  # c0(x) = k0 - 2x
    common = (16 * t * (1 - t)) * _X * (3 * _X - 4) * (3 * _X - 5) * (5 * _X - 9)
    w_minus_x = Polynomial.linear(w, -1)
    q_at_x = Polynomial.linear(k0, c1 - 2)
    q_at_53 = Polynomial.linear(F(5, 3) * c1 + k0, -2)
    c0_poly = Polynomial.linear(k0, -2)

    branches = [
        ("sup-at-x", common + 5 * w_minus_x * w_minus_x * q_at_x * q_at_x,
         IntervalQ(DOMAIN_LO, DOMAIN_HI)),
        ("sup-at-5/3", common + 3 * _X * w_minus_x * w_minus_x * q_at_53 * q_at_53,
         IntervalQ(DOMAIN_LO, DOMAIN_HI)),
    ]
    # critical branch applicability: 5/3 <= (k0 - 2x)/c1 <= x
    x_upper = (k0 - F(5, 3) * c1) / 2
    x_lower = k0 / (2 + c1)
    seg_lo = max(DOMAIN_LO, x_lower)
    seg_hi = min(DOMAIN_HI, x_upper)
    if seg_lo <= seg_hi:
        p3 = common + 20 * c1 * _X * c0_poly * w_minus_x * w_minus_x
        branches.append(("sup-at-critical", p3, IntervalQ(seg_lo, seg_hi)))
    return branches


def left_certificate_value(t, w, x) -> Fraction:
    """The lower-endpoint certificate value phi(x); max over branch values."""
    x, w, t = rat(x), rat(w), rat(t)
    common = 16 * t * (1 - t) * x * (3 * x - 4) * (3 * x - 5) * (5 * x - 9)
    return common + 5 * (w - x) ** 2 * pb.weight_sup_over_s(x, w, t)


@dataclass
class _Crossing:
    """First point along a branch where the branch value becomes >= 0."""

    kind: str                 # "none" | "at-start" | "root"
    lo: Fraction | None = None
    hi: Fraction | None = None
    certificate: SignCertificate | None = None
    dossier: tuple[SignCertificate, ...] = ()


def _nonzero_point_above(p: Polynomial, u: Fraction, v: Fraction) -> Fraction:
    """Point u' slightly above u with p(u') != 0."""
    delta = (v - u) / 10**6
    for _ in range(10):
        candidate = u + delta
        if candidate < v and p(candidate) != 0:
            return candidate
        delta /= 10
    raise ExactPolyError(f"no nonzero point just above {u}")


def _deflate_root(p: Polynomial, u: Fraction) -> Polynomial:
    """Divide out every (x - u) factor; requires p(u) == 0."""
    g = p
    factor = Polynomial.linear(-u, 1)
    while not g.is_zero:
        q, r = g.divmod(factor)
        if not r.is_zero:
            break
        g = q
    return g


def _first_nonneg(p: Polynomial, u: Fraction, v: Fraction, width: Fraction) -> _Crossing:
    """Locate the first x in (u, v) where p(x) >= 0.

    The returned data is backed by exact certificates: "none" carries a
    no-root certificate over the whole segment, "root" carries an
    exactly-one-root certificate for the enclosure of the branch's smallest
    root (endpoints of opposite sign).  When the segment starts at a root of
    p, the root factor is divided out exactly so that strict negativity of
    the quotient certifies the sign of p on the initial sliver.
    """
    if p(u) > 0:
        return _Crossing(kind="at-start", lo=u, hi=u)
    u_in = _nonzero_point_above(p, u, v)
    if p(u_in) > 0:
        return _Crossing(kind="at-start", lo=u, hi=u_in)
    dossier = []
    # certify p < 0 on the sliver (u, u_in]
    if p(u) == 0:
        g = _deflate_root(p, u)
        if g(u) > 0:
            # p = (x-u)^k g turns positive immediately above u
            return _Crossing(kind="at-start", lo=u, hi=u_in)
        # p = (x-u)^k g with (x-u)^k > 0 above u, so sign(p) = sign(g) there
        dossier.append(certify_sign_on_interval(g, IntervalQ(u, u_in), "negative"))
    else:
        n_gap, cert_gap = count_roots(p, IntervalQ(u, u_in))
        if n_gap != 0:
            enclosure, cert = _isolate_smallest_root(p, u, u_in, width)
            return _Crossing(kind="root", lo=enclosure.lo, hi=enclosure.hi,
                             certificate=cert, dossier=(cert_gap,))
        dossier.append(cert_gap)
    v_in = v
    if p(v_in) == 0:
        v_in = v - (v - u) / 10**6
        while p(v_in) == 0:
            v_in = (u_in + v_in) / 2
    counter = _RootCounter(p)
    n = counter.count(u_in, v_in)
    if n == 0:
        _, evidence = _count_evidence(p, u_in, v_in)
        cert = SignCertificate(p, IntervalQ(u_in, v_in), CLAIM_NO_ROOT, evidence)
        dossier.append(cert)
        return _Crossing(kind="none", dossier=tuple(dossier))
    enclosure, cert = _isolate_smallest_root(p, u_in, v_in, width, counter=counter)
    # dossier: no roots strictly below the enclosure, so p < 0 there
    if enclosure.lo > u_in:
        _, ev = _count_evidence(p, u_in, enclosure.lo)
        dossier.append(SignCertificate(p, IntervalQ(u_in, enclosure.lo), CLAIM_NO_ROOT, ev))
    return _Crossing(kind="root", lo=enclosure.lo, hi=enclosure.hi,
                     certificate=cert, dossier=tuple(dossier))


def _isolate_smallest_root(
    p: Polynomial,
    a: Fraction,
    b: Fraction,
    width: Fraction,
    counter: _RootCounter | None = None,
) -> tuple[IntervalQ, SignCertificate]:
    """Enclose the smallest root of p in (a, b); requires p(a) != 0 != p(b).

    Count-driven bisection keeps the leftmost root bracketed until exactly
    one remains, then sign bisection tightens to the requested width.
    """
    counter = counter or _RootCounter(p)
    if counter.count(a, b) < 1:
        raise ValueError("no root to isolate")
    while counter.count(a, b) > 1 or b - a > width:
        mid = (a + b) / 2
        if p(mid) == 0:
            mid = _offset_midpoint(p, a, b)
        if counter.count(a, mid) >= 1:
            b = mid
        else:
            a = mid
    if p(a) * p(b) >= 0:
        # a single root without a sign change is an even-multiplicity touch
        raise ExactPolyError(
            "branch root has even multiplicity; no sign-change enclosure exists"
        )
    _, evidence = _count_evidence(p, a, b)
    enclosure = IntervalQ(a, b)
    return enclosure, SignCertificate(p, enclosure, CLAIM_ONE_ROOT, evidence)


def left_threshold(t, w, width=F(1, 10**6)) -> ThresholdEnclosure:
    """Certified enclosure of the lower-endpoint threshold at parameters (t, w).

    The threshold is the largest x such that the certificate stays negative
    on (5/3, x); pinching below it forces S to sit at the lower endpoint.
    When the certificate is nonnegative already at the domain edge the
    degenerate enclosure [5/3, 5/3] is returned.
    """
    t, w, width = rat(t), rat(w), rat(width)
    if not 0 < t <= F(1, 2):
        raise ValueError(f"parameter t must satisfy 0 < t <= 1/2, got {t}")
    if not DOMAIN_LO <= w <= DOMAIN_HI:
        raise ValueError(f"w = {w} outside [5/3, 9/5]")
    if width <= 0:
        raise ValueError("width must be positive")

    phi_start = left_certificate_value(t, w, DOMAIN_LO)
    if phi_start < 0:
        raise AssertionError("certificate value at 5/3 is a weighted square; cannot be negative")
    if phi_start > 0:
        # nonnegative at (and hence just above) the domain edge: no usable
        # region.  phi(5/3) = 5 (w - 5/3)^2 q(5/3)^2, so a sign certificate
        # for the linear weight factor q witnesses the degeneracy cheaply.
        c1, _ = pb.weight_linear_coeffs(DOMAIN_LO, w, t)
        k0 = c1 * w + F(36, 5) - F(126, 5) * t
        q_at_53 = Polynomial.linear(F(5, 3) * c1 + k0, -2)
        enclosure = IntervalQ(DOMAIN_LO, DOMAIN_LO)
        sign = "positive" if q_at_53(DOMAIN_LO) > 0 else "negative"
        cert = certify_sign_on_interval(q_at_53, enclosure, sign)
        return ThresholdEnclosure(
            side="left", t=t, w=w, enclosure=enclosure, certificate=cert,
            degenerate=True, phi_lo=phi_start, phi_hi=phi_start,
        )
    branches = left_branch_polynomials(w, t)

    crossings: list[tuple[Fraction, Fraction, _Crossing]] = []
    dossier: list[SignCertificate] = []
    for label, p, seg in branches:
        if p.is_zero:
            raise ExactPolyError(f"branch {label} degenerated to the zero polynomial")
        crossing = _first_nonneg(p, seg.lo, seg.hi, width / 2)
        dossier.extend(crossing.dossier)
        if crossing.kind != "none":
            crossings.append((crossing.lo, crossing.hi, crossing))

    if not crossings:
        # negative across the whole domain: threshold sits at the far edge
        enclosure = IntervalQ(DOMAIN_HI, DOMAIN_HI)
        label, p2, _ = branches[0]
        _, evidence = _count_evidence(p2, DOMAIN_HI, DOMAIN_HI)
        cert = SignCertificate(p2, enclosure, CLAIM_NO_ROOT, evidence)
        return ThresholdEnclosure(
            side="left", t=t, w=w, enclosure=enclosure, certificate=cert,
            degenerate=True, support=tuple(dossier),
            phi_lo=left_certificate_value(t, w, DOMAIN_HI),
            phi_hi=left_certificate_value(t, w, DOMAIN_HI),
        )

    crossings.sort(key=lambda item: (item[0], item[1]))
    lo, hi, winner = crossings[0]
    if winner.kind == "at-start" or winner.certificate is None:
        raise ExactPolyError(
            "certificate becomes nonnegative at a branch segment boundary; "
            "no sign-change enclosure exists for these parameters"
        )
    phi_lo = left_certificate_value(t, w, lo)
    phi_hi = left_certificate_value(t, w, hi)
    if not (phi_lo < 0 < phi_hi):
        raise ExactPolyError(
            f"threshold enclosure failed the exact endpoint check: "
            f"phi({lo}) = {phi_lo}, phi({hi}) = {phi_hi}"
        )
    return ThresholdEnclosure(
        side="left", t=t, w=w, enclosure=IntervalQ(lo, hi),
        certificate=winner.certificate, degenerate=False,
        support=tuple(dossier), phi_lo=phi_lo, phi_hi=phi_hi,
    )


def right_threshold(t, width=F(1, 10**6)) -> ThresholdEnclosure:
    """Certified enclosure of the upper-endpoint threshold at parameter t.

    Encloses the unique root of the upper-endpoint cubic in [5/3, 9/5];
    pinching above the enclosure forces S to sit at the upper endpoint.
    With no interior root (t = 1/2) the degenerate enclosure [9/5, 9/5] is
    returned together with the no-root certificate.
    """
    t, width = rat(t), rat(width)
    p = pb.theta2(t)
    n, count_cert = count_roots(p, pb.PINCH_DOMAIN)
    if n == 0:
        return ThresholdEnclosure(
            side="right", t=t, w=DOMAIN_HI,
            enclosure=IntervalQ(DOMAIN_HI, DOMAIN_HI),
            certificate=count_cert, degenerate=True,
        )
    if n != 1:
        raise ExactPolyError(f"expected at most one root in the domain, found {n}")
    enclosure, cert = isolate_root(p, pb.PINCH_DOMAIN, width)
    return ThresholdEnclosure(
        side="right", t=t, w=DOMAIN_HI, enclosure=enclosure,
        certificate=cert, degenerate=False, support=(count_cert,),
        phi_lo=p(enclosure.lo), phi_hi=p(enclosure.hi),
    )


def replay_threshold(th: ThresholdEnclosure) -> bool:
    """Re-derive every certified fact backing a threshold enclosure."""
    if not th.certificate.replay():
        return False
    if not all(c.replay() for c in th.support):
        return False
    if th.degenerate:
        if th.side == "left" and th.phi_lo is not None:
            return left_certificate_value(th.t, th.w, th.enclosure.lo) == th.phi_lo
        return True
    if th.side == "right":
        p = pb.theta2(th.t)
        return p(th.enclosure.lo) > 0 > p(th.enclosure.hi)
    phi_lo = left_certificate_value(th.t, th.w, th.enclosure.lo)
    phi_hi = left_certificate_value(th.t, th.w, th.enclosure.hi)
    return phi_lo < 0 < phi_hi and phi_lo == th.phi_lo and phi_hi == th.phi_hi


@dataclass(frozen=True)
class Optimum:
    """Best certified threshold found by a sweep, with its full audit row set."""

    side: str
    best_t: Fraction
    best_w: Fraction
    threshold: IntervalQ
    certificate: SignCertificate
    best: ThresholdEnclosure
    table: tuple[tuple[Fraction, Fraction, Fraction, Fraction, bool], ...]
    degenerate_count: int

    def to_json(self) -> dict:
        return {
            "side": self.side,
            "best_t": rat_str(self.best_t),
            "best_w": rat_str(self.best_w),
            "threshold": self.threshold.to_json(),
            "certificate": self.certificate.to_json(),
            "best": self.best.to_json(),
            "table": [
                {
                    "t": rat_str(t),
                    "w": rat_str(w),
                    "lo": rat_str(lo),
                    "hi": rat_str(hi),
                    "degenerate": deg,
                }
                for (t, w, lo, hi, deg) in self.table
            ],
            "degenerate_count": self.degenerate_count,
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _strength_key(side: str, th: ThresholdEnclosure) -> tuple:
    """Sort key: stronger thresholds first, then smallest t, then smallest w.

    The usable constant of a left enclosure is its lower end (larger is
    stronger); of a right enclosure its upper end (smaller is stronger).
    """
    if side == "left":
        return (-th.enclosure.lo, -th.enclosure.hi, th.t, th.w)
    return (th.enclosure.hi, th.enclosure.lo, th.t, th.w)


def _evaluate(side: str, t: Fraction, w: Fraction, width: Fraction,
              cache: dict) -> ThresholdEnclosure:
    key = (t, w)
    if key not in cache:
        if side == "left":
            cache[key] = left_threshold(t, w, width)
        else:
            cache[key] = right_threshold(t, width)
    return cache[key]


def _trisect_candidates(values: list[Fraction], incumbent: Fraction) -> list[Fraction]:
    """Trisection probes of the grid gaps adjacent to the incumbent."""
    values = sorted(set(values))
    i = values.index(incumbent)
    out = []
    if i > 0:
        gap = incumbent - values[i - 1]
        out.extend([incumbent - gap / 3, incumbent - 2 * gap / 3])
    if i + 1 < len(values):
        gap = values[i + 1] - incumbent
        out.extend([incumbent + gap / 3, incumbent + 2 * gap / 3])
    return out


def optimize(side: str, config: SweepConfig) -> Optimum:
    """Grid sweep plus exact trisection refinement around the incumbent.

    Deterministic: probes are exact rationals, results are compared exactly,
    and ties break toward smaller t then smaller w.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    width = config.isolation_width
    cache: dict = {}
    w_values = list(config.w_grid) if side == "left" else [DOMAIN_HI]
    probes_t = list(config.t_grid)
    for t in probes_t:
        for w in w_values:
            _evaluate(side, t, w, width, cache)

    def incumbent() -> tuple[tuple[Fraction, Fraction], ThresholdEnclosure]:
        best_key = min(cache, key=lambda k: _strength_key(side, cache[k]))
        return best_key, cache[best_key]

    for _ in range(config.refinement_rounds):
        (t_best, w_best), _best = incumbent()
        t_probes = sorted({k[0] for k in cache})
        for t_new in _trisect_candidates(t_probes, t_best):
            if 0 < t_new <= F(1, 2):
                _evaluate(side, t_new, w_best, width, cache)
        if side == "left":
            (t_best, w_best), _best = incumbent()
            w_probes = sorted({k[1] for k in cache})
            for w_new in _trisect_candidates(w_probes, w_best):
                if DOMAIN_LO <= w_new <= DOMAIN_HI:
                    _evaluate(side, t_best, w_new, width, cache)

    (t_best, w_best), best = incumbent()
    rows = []
    degenerate_count = 0
    for (t, w) in sorted(cache):
        th = cache[(t, w)]
        if th.degenerate:
            degenerate_count += 1
            if side == "left":
                continue  # keep the table compact; count recorded instead
        rows.append((t, w, th.enclosure.lo, th.enclosure.hi, th.degenerate))
    return Optimum(
        side=side,
        best_t=t_best,
        best_w=w_best,
        threshold=best.enclosure,
        certificate=best.certificate,
        best=best,
        table=tuple(rows),
        degenerate_count=degenerate_count,
    )
