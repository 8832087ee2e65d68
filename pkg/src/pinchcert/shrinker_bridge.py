"""Dictionary between closed self-shrinkers and spherical minimal surfaces.

A closed surface self-shrinker with nowhere-vanishing mean curvature and
parallel normalized mean curvature vector is a minimal surface of the
radius-2 sphere; rescaling to the unit sphere converts the traceless
second-form norm by S = 4 |A_ring|^2.  The classifier applies the certified
spherical thresholds (divided by 4) to user-supplied pinching bounds and
names the rigid model surface when the case table pins it down.

All thresholds are exact rationals; interval membership is decided exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .exact_poly import rat, rat_str

F = Fraction

#: spherical-scale oscillation threshold for rigidity
OSCILLATION_SPHERICAL = F(1, 220)
#: same threshold on the shrinker scale (spherical / 4)
OSCILLATION_SHRINKER = F(1, 880)
#: oscillation equivalent to closing the full conjectured gap
OSCILLATION_CONJECTURAL = F(2, 15)

#: certified pinching constants on the shrinker scale (spherical / 4)
LOWER_THRESHOLD_SHRINKER = F(683, 1600)    # 0.426875 = 1.7075 / 4
UPPER_THRESHOLD_SHRINKER = F(17853, 40000)  # 0.446325 = 1.7853 / 4

_MODELS = {
    "round-sphere": "round sphere S^2(2) in R^3",
    "veronese": "Veronese surface S^2(2*sqrt(3)) -> S^4(2) in R^5",
    "calabi-s3": "Calabi sphere S^2(2*sqrt(6)) -> S^6(2) in R^7",
    "calabi-s4": "Calabi sphere S^2(2*sqrt(10)) -> S^8(2) in R^9",
}

# case table rows: (case id, range lo, range hi, needs-oscillation,
#                   {constant value: (verdict, sub-label)})
_CASES = (
    ("1", F(0), F(1, 3), False,
     {F(0): ("round-sphere", "1a"), F(1, 3): ("veronese", "1b")}),
    ("2", F(1, 3), F(5, 12), False,
     {F(1, 3): ("veronese", "2a"), F(5, 12): ("calabi-s3", "2b")}),
    ("3a", F(5, 12), LOWER_THRESHOLD_SHRINKER, False,
     {F(5, 12): ("calabi-s3", "3a")}),
    ("3b", UPPER_THRESHOLD_SHRINKER, F(9, 20), False,
     {F(9, 20): ("calabi-s4", "3b")}),
    ("3c", F(5, 12), F(9, 20), True,
     {F(5, 12): ("calabi-s3", "3c"), F(9, 20): ("calabi-s4", "3c")}),
)


@dataclass(frozen=True)
class ShrinkerPinchData:
    """Certified bounds on the traceless second-form norm of a self-shrinker."""

    a_circ_min: Fraction
    a_circ_max: Fraction
    mean_curvature_nonvanishing: bool
    normalized_H_parallel: bool

    def __post_init__(self):
        object.__setattr__(self, "a_circ_min", rat(self.a_circ_min))
        object.__setattr__(self, "a_circ_max", rat(self.a_circ_max))
        if not 0 <= self.a_circ_min <= self.a_circ_max:
            raise ValueError(
                f"need 0 <= min <= max, got [{self.a_circ_min}, {self.a_circ_max}]"
            )

    def to_json(self) -> dict:
        return {
            "a_circ_min": rat_str(self.a_circ_min),
            "a_circ_max": rat_str(self.a_circ_max),
            "mean_curvature_nonvanishing": self.mean_curvature_nonvanishing,
            "normalized_H_parallel": self.normalized_H_parallel,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ShrinkerPinchData":
        return cls(
            a_circ_min=rat(data["a_circ_min"]),
            a_circ_max=rat(data["a_circ_max"]),
            mean_curvature_nonvanishing=bool(data["mean_curvature_nonvanishing"]),
            normalized_H_parallel=bool(data["normalized_H_parallel"]),
        )


@dataclass(frozen=True)
class Classification:
    """Outcome of the rigidity case table for one set of pinching bounds."""

    verdict: str
    model: str
    theorem_case: str | None
    applicable_cases: tuple[str, ...]
    possible_models: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "model": self.model,
            "theorem_case": self.theorem_case,
            "applicable_cases": list(self.applicable_cases),
            "possible_models": list(self.possible_models),
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def spherical_to_shrinker(s_unit) -> Fraction:
    """Unit-sphere S to the shrinker-scale traceless norm: divide by 4."""
    s_unit = rat(s_unit)
    if s_unit < 0:
        raise ValueError(f"S must be nonnegative, got {s_unit}")
    return s_unit / 4


def shrinker_norms(a_r_sq) -> tuple[Fraction, Fraction]:
    """Spherical |A|^2 and traceless |A_ring|^2 from the Euclidean |A_R|^2.

    Both equal |A_R|^2 - 1/2: the mean curvature of a closed shrinker on the
    radius-2 sphere has unit Euclidean norm, so the Gauss-equation shift and
    the trace removal subtract the same 1/2.
    """
    a_r_sq = rat(a_r_sq)
    if a_r_sq < F(1, 2):
        raise ValueError(
            f"|A_R|^2 must be >= 1/2 for a spherical shrinker, got {a_r_sq}"
        )
    value = a_r_sq - F(1, 2)
    return value, value


@dataclass(frozen=True)
class OscillationThresholds:
    spherical: Fraction
    shrinker: Fraction
    conjectural: Fraction

    def to_json(self) -> dict:
        return {
            "spherical": rat_str(self.spherical),
            "shrinker": rat_str(self.shrinker),
            "conjectural": rat_str(self.conjectural),
        }


def oscillation_threshold() -> OscillationThresholds:
    """Rigidity oscillation bounds: 1/220 spherical, 1/880 shrinker, 2/15 conjectural."""
    return OscillationThresholds(
        spherical=OSCILLATION_SPHERICAL,
        shrinker=OSCILLATION_SHRINKER,
        conjectural=OSCILLATION_CONJECTURAL,
    )


def classify(data: ShrinkerPinchData) -> Classification:
    """Apply the rigidity case table to certified pinching bounds.

    Bounds are read as lo <= |A_ring|^2 <= hi pointwise.  A case applies
    when [lo, hi] sits inside its range (and, for the oscillation case,
    hi - lo stays within 1/880).  Within an applicable case the conclusion
    is |A_ring|^2 == c for one of the case's constants, which must then lie
    in [lo, hi]; a single surviving constant names the model.  Overlapping
    cases are all recorded; the verdict follows the lowest-numbered one.
    """
    if not (data.mean_curvature_nonvanishing and data.normalized_H_parallel):
        return Classification(
            verdict="hypotheses-not-met",
            model="mean curvature must be nowhere vanishing with parallel "
                  "normalized direction",
            theorem_case=None,
            applicable_cases=(),
            possible_models=(),
        )
    lo, hi = data.a_circ_min, data.a_circ_max
    applicable: list[tuple[str, list[tuple[Fraction, str, str]]]] = []
    labels: list[str] = []
    for case_id, range_lo, range_hi, needs_osc, constants in _CASES:
        if not (range_lo <= lo and hi <= range_hi):
            continue
        if needs_osc and hi - lo > OSCILLATION_SHRINKER:
            continue
        admissible = [
            (value, verdict, sub_label)
            for value, (verdict, sub_label) in sorted(constants.items())
            if lo <= value <= hi
        ]
        applicable.append((case_id, admissible))
        if admissible:
            labels.extend(sub_label for _, _, sub_label in admissible)
        else:
            labels.append(case_id)
    if not applicable:
        return Classification(
            verdict="inconclusive",
            model="bounds fall outside every rigidity case",
            theorem_case=None,
            applicable_cases=(),
            possible_models=(),
        )
    primary_case, admissible = applicable[0]
    # dedupe labels preserving order
    seen = set()
    all_labels = tuple(x for x in labels if not (x in seen or seen.add(x)))
    if len(admissible) == 1:
        value, verdict, sub_label = admissible[0]
        return Classification(
            verdict=verdict,
            model=f"|A_ring|^2 == {rat_str(value)}; {_MODELS[verdict]}",
            theorem_case=sub_label,
            applicable_cases=all_labels,
            possible_models=(verdict,),
        )
    if not admissible:
        return Classification(
            verdict="inconclusive",
            model="rigidity forces a constant the bounds exclude; "
                  "no such self-shrinker exists",
            theorem_case=primary_case,
            applicable_cases=all_labels,
            possible_models=(),
        )
    models = tuple(verdict for _, verdict, _ in admissible)
    prose = " or ".join(f"|A_ring|^2 == {rat_str(v)} ({_MODELS[m]})" for v, m, _ in admissible)
    return Classification(
        verdict="inconclusive",
        model=f"rigid but not pinned to one model: {prose}",
        theorem_case=primary_case,
        applicable_cases=all_labels,
        possible_models=models,
    )


def classify_json(payload: dict) -> dict:
    """JSON-in / JSON-out wrapper around :func:`classify`."""
    data = ShrinkerPinchData.from_json(payload)
    return classify(data).to_json()


def _snap(value: Fraction, tolerance: Fraction) -> Fraction:
    """Nearest small-denominator rational within tolerance, else unchanged."""
    candidate = value.limit_denominator(1024)
    return candidate if abs(candidate - value) <= tolerance else value


def classification_from_scan(scan, mean_curvature_nonvanishing: bool = True,
                             normalized_H_parallel: bool = True,
                             snap_tolerance=F(1, 10**6)) -> Classification:
    """Classify a sampled immersion: rescale measured S to the shrinker scale.

    Measured floats convert exactly to rationals (binary expansion) and are
    then snapped to a nearby small-denominator rational within
    ``snap_tolerance``; a measured 4/3 +- 1e-10 would otherwise straddle the
    exact case boundary at 1/3.  Callers with certified bounds should build
    :class:`ShrinkerPinchData` directly and skip the snapping.
    """
    snap_tolerance = rat(snap_tolerance)
    s_min = _snap(F(float(min(scan.S))), 4 * snap_tolerance)
    s_max = _snap(F(float(max(scan.S))), 4 * snap_tolerance)
    data = ShrinkerPinchData(
        a_circ_min=max(F(0), s_min / 4),
        a_circ_max=max(F(0), s_max / 4),
        mean_curvature_nonvanishing=mean_curvature_nonvanishing,
        normalized_H_parallel=normalized_H_parallel,
    )
    return classify(data)
