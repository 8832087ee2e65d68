"""Command-line front end: certification suites, sweeps, scans, classification.

Every subcommand produces a :class:`CertificationReport` whose JSON form
contains each certificate verbatim, so a report can be re-verified offline
by replaying its certificates.  The markdown summary is rendered from the
same structures, never from side channels.

Exit codes: 0 all certified / in tolerance, 1 certification failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__, REPORT_SCHEMA
from . import calabi_lab as cl
from . import param_search as ps
from . import pinching_bounds as pb
from . import shrinker_bridge as sb
from .exact_poly import (
    IntervalQ,
    SignCertificate,
    certify_sign_on_interval,
    count_roots,
    isolate_root,
    rat,
    rat_str,
)

F = Fraction

EXIT_OK = 0
EXIT_CERTIFICATION_FAILURE = 1
EXIT_USAGE = 2


@dataclass
class Check:
    """One named pass/fail fact with its exact evidence values."""

    label: str
    passed: bool
    details: dict


@dataclass
class CertificationReport:
    command: str
    inputs: dict
    checks: list[Check] = field(default_factory=list)
    certificates: list[dict] = field(default_factory=list)   # {label, certificate}
    enclosures: list[dict] = field(default_factory=list)     # {label, interval}
    scans: list[dict] = field(default_factory=list)
    verdicts: list[dict] = field(default_factory=list)
    wall_time_ms: int = 0
    toolkit_version: str = __version__
    schema: str = REPORT_SCHEMA

    def add_certificate(self, label: str, cert: SignCertificate) -> None:
        self.certificates.append({"label": label, "certificate": cert.to_json()})

    def add_enclosure(self, label: str, interval: IntervalQ) -> None:
        self.enclosures.append({"label": label, "interval": interval.to_json()})

    def add_check(self, label: str, passed: bool, **details) -> None:
        self.checks.append(Check(label=label, passed=bool(passed), details=details))

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[str]:
        return [c.label for c in self.checks if not c.passed]

    def replay_certificates(self) -> bool:
        return all(
            SignCertificate.from_json(entry["certificate"]).replay()
            for entry in self.certificates
        )

    def to_json_dict(self) -> dict:
        return {
            "schema": self.schema,
            "toolkit_version": self.toolkit_version,
            "command": self.command,
            "inputs": self.inputs,
            "checks": [
                {"label": c.label, "passed": c.passed, "details": c.details}
                for c in self.checks
            ],
            "certificates": self.certificates,
            "enclosures": self.enclosures,
            "scans": self.scans,
            "verdicts": self.verdicts,
            "wall_time_ms": self.wall_time_ms,
        }

    def to_json_str(self, strip_wall_time: bool = False) -> str:
        data = self.to_json_dict()
        if strip_wall_time:
            data.pop("wall_time_ms")
        return json.dumps(data, sort_keys=True, indent=2)

    def render_markdown(self) -> str:
        lines = [
            f"# pinchcert report: {self.command}",
            "",
            f"- schema: `{self.schema}`, toolkit {self.toolkit_version}",
            f"- result: **{'all certified' if self.all_passed else 'FAILED: ' + ', '.join(self.failing())}**",
            "",
        ]
        if self.checks:
            lines += ["| check | status | details |", "|---|---|---|"]
            for c in self.checks:
                detail = "; ".join(f"{k}={v}" for k, v in sorted(c.details.items()))
                lines.append(f"| {c.label} | {'pass' if c.passed else 'FAIL'} | {detail} |")
            lines.append("")
        if self.enclosures:
            lines += ["| enclosure | lo | hi | lo (approx) | hi (approx) |", "|---|---|---|---|---|"]
            for e in self.enclosures:
                lo, hi = e["interval"]
                lines.append(
                    f"| {e['label']} | {lo} | {hi} | "
                    f"{float(rat(lo)):.12g} | {float(rat(hi)):.12g} |"
                )
            lines.append("")
        for scan in self.scans:
            lines.append(f"## scan: {scan.get('label', '')}")
            lines.append("```")
            lines.append(scan.get("table", ""))
            lines.append("```")
            lines.append("")
        for verdict in self.verdicts:
            lines.append(
                f"- verdict: **{verdict['verdict']}** "
                f"(case {verdict.get('theorem_case')}), {verdict.get('model')}"
            )
        lines.append(f"- certificates embedded: {len(self.certificates)}")
        return "\n".join(lines)


def _approx(q: Fraction) -> str:
    return f"{float(q):.12g}"


# ---------------------------------------------------------------------------
# certify
# ---------------------------------------------------------------------------


def cmd_certify() -> CertificationReport:
    """The fixed certification suite for every constant the toolkit asserts."""
    report = CertificationReport(command="certify", inputs={})
    domain = pb.PINCH_DOMAIN

    theta1 = pb.theta1()
    n1, cert_n1 = count_roots(theta1, domain)
    report.add_certificate("theta1-root-count", cert_n1)
    report.add_check("theta1-unique-root", n1 == 1, count=n1)

    enc1, cert_e1 = isolate_root(theta1, domain, F(1, 10**6))
    report.add_certificate("theta1-enclosure", cert_e1)
    report.add_enclosure("theta1-root", enc1)
    lo_ok = theta1(rat("1.7075")) < 0
    hi_ok = theta1(rat("1.7076")) > 0
    report.add_check(
        "theta1-bracket",
        lo_ok and hi_ok and rat("1.7075") < enc1.lo and enc1.hi < rat("1.7076"),
        value_at_lower=rat_str(theta1(rat("1.7075"))),
        value_at_upper=rat_str(theta1(rat("1.7076"))),
        enclosure_lo=rat_str(enc1.lo),
        enclosure_hi=rat_str(enc1.hi),
    )

    theta2 = pb.theta2(F(1, 4))
    n2, cert_n2 = count_roots(theta2, domain)
    report.add_certificate("theta2-root-count", cert_n2)
    report.add_check("theta2-unique-root", n2 == 1, count=n2, t="1/4")

    enc2, cert_e2 = isolate_root(theta2, domain, F(1, 10**6))
    report.add_certificate("theta2-enclosure", cert_e2)
    report.add_enclosure("theta2-root", enc2)
    report.add_check(
        "theta2-bracket",
        theta2(rat("1.7852")) > 0 > theta2(rat("1.7853"))
        and rat("1.7852") < enc2.lo and enc2.hi < rat("1.7853"),
        value_at_lower=rat_str(theta2(rat("1.7852"))),
        value_at_upper=rat_str(theta2(rat("1.7853"))),
        enclosure_lo=rat_str(enc2.lo),
        enclosure_hi=rat_str(enc2.hi),
    )

    monotone_cert = certify_sign_on_interval(
        pb.gap_derivative_numerator(), domain, "negative"
    )
    report.add_certificate("gap-bound-decreasing", monotone_cert)
    report.add_check("gap-bound-decreasing", True, claim="N'D - ND' < 0 on [5/3, 9/5]")

    y = pb.gap_lower_bound(F(17853, 10000))
    report.add_check(
        "gap-at-17853",
        y > F(4565, 10**6) > F(1, 220),
        value=rat_str(y),
        exceeds="4565/1000000",
        oscillation_bound="1/220",
    )

    legacy_beaten = []
    for k in range(1, 10):
        w = F(5, 3) + F(k, 10) * F(2, 15)
        legacy_beaten.append(pb.compare_legacy_to_new(w) == -1)
    report.add_certificate("legacy-radicand-positive", pb.legacy_radicand_certificate())
    report.add_check(
        "legacy-bound-dominated-9pts", all(legacy_beaten),
        points=9, stronger_at=sum(legacy_beaten),
    )

    report.add_certificate("gap-denominator-positive", pb.denominator_positive_certificate())
    import random

    rng = random.Random(9120)
    residuals_zero = True
    for _ in range(100):
        w = F(5, 3) + F(2, 15) * F(rng.randint(0, 10**6), 10**6)
        if pb.smax_threshold(w) - w - pb.gap_lower_bound(w) != 0:
            residuals_zero = False
    report.add_check("smax-threshold-identity-100", residuals_zero, samples=100, seed=9120)

    scale_ok = (
        4 * sb.LOWER_THRESHOLD_SHRINKER == rat("1.7075")
        and 4 * sb.UPPER_THRESHOLD_SHRINKER == rat("1.7853")
        and 4 * sb.OSCILLATION_SHRINKER == sb.OSCILLATION_SPHERICAL
    )
    report.add_check(
        "shrinker-scale-consistency", scale_ok,
        lower="4 * 683/1600 = 1.7075", upper="4 * 17853/40000 = 1.7853",
        oscillation="4 * 1/880 = 1/220",
    )

    report.add_check("certificate-replay", report.replay_certificates(),
                     certificates=len(report.certificates))

    threshold_reports = [
        pb.ThresholdReport(
            name="lower endpoint rigidity",
            certificates=(cert_n1, cert_e1),
            root_enclosure=enc1,
            parameters={"t": F(1, 2), "w": F(5, 3)},
            conclusion="pinching 5/3 <= S <= 1.7075 forces S == 5/3 (curvature 1/6)",
        ),
        pb.ThresholdReport(
            name="interior oscillation bound",
            certificates=(monotone_cert,),
            root_enclosure=None,
            parameters={},
            conclusion="S_max - S_min >= gap_lower_bound(S_min) > 1/220 up to 1.7853",
        ),
        pb.ThresholdReport(
            name="upper endpoint rigidity",
            certificates=(cert_n2, cert_e2),
            root_enclosure=enc2,
            parameters={"t": F(1, 4), "w": F(9, 5)},
            conclusion="pinching 1.7853 <= S <= 9/5 forces S == 9/5 (curvature 1/10)",
        ),
    ]
    report.scans.append(
        {
            "label": "certified pinching thresholds",
            "table": pb.render_markdown_table(threshold_reports),
            "reports": [r.to_json() for r in threshold_reports],
        }
    )
    return report


# ---------------------------------------------------------------------------
# optimize
# ---------------------------------------------------------------------------


def _load_config(side: str, path: str | None) -> ps.SweepConfig:
    if path is None:
        return ps.default_config(side)
    with open(path, "r", encoding="utf-8") as fh:
        return ps.SweepConfig.from_json(json.load(fh))


def cmd_optimize(side: str, config: ps.SweepConfig) -> CertificationReport:
    report = CertificationReport(
        command=f"optimize --side {side}", inputs={"config": config.to_json()}
    )
    optimum = ps.optimize(side, config)
    report.add_enclosure("best-threshold", optimum.threshold)
    report.add_certificate("best-threshold", optimum.certificate)
    for cert in optimum.best.support:
        report.add_certificate("best-threshold-support", cert)
    report.scans.append(
        {
            "label": f"sweep table ({side})",
            "table": "\n".join(
                f"t={rat_str(t)} w={rat_str(w)} lo={rat_str(lo)} hi={rat_str(hi)}"
                + (" degenerate" if deg else "")
                for (t, w, lo, hi, deg) in optimum.table
            ),
        }
    )
    report.verdicts.append(
        {
            "verdict": "optimum",
            "theorem_case": side,
            "model": f"t = {rat_str(optimum.best_t)}, w = {rat_str(optimum.best_w)}, "
                     f"threshold ~ [{_approx(optimum.threshold.lo)}, "
                     f"{_approx(optimum.threshold.hi)}]",
        }
    )
    report.inputs["optimum"] = optimum.to_json()
    report.add_check(
        "threshold-replay", ps.replay_threshold(optimum.best),
        best_t=rat_str(optimum.best_t), best_w=rat_str(optimum.best_w),
        degenerate_rows=optimum.degenerate_count,
    )
    report.add_check("certificate-replay", report.replay_certificates(),
                     certificates=len(report.certificates))
    return report


# ---------------------------------------------------------------------------
# lab
# ---------------------------------------------------------------------------


def cmd_lab(s: int, n_samples: int, seed: int, step: float,
            csv_path: str | None = None) -> CertificationReport:
    report = CertificationReport(
        command=f"lab --s {s}",
        inputs={"s": s, "samples": n_samples, "seed": seed, "step": repr(step)},
    )
    imm = cl.build_calabi_immersion(s)
    scan = cl.geometry_scan(
        imm, n_samples, seed, with_derivatives=True, deriv_step=step
    )
    identity_report = cl.verify_identities(scan)
    report.scans.append(
        {
            "label": f"calabi degree {s}",
            "summary": scan.summary(),
            "identities": identity_report.to_json(),
            "table": identity_report.render_table(),
        }
    )
    for row in identity_report.residuals:
        report.add_check(
            f"identity-{row.name}",
            row.passed or row.absent,
            max_residual=repr(row.max_residual),
            tolerance=repr(row.tolerance),
            absent=row.absent,
        )
    if csv_path:
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(scan.to_csv())
    return report


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------


def cmd_classify(data: sb.ShrinkerPinchData) -> CertificationReport:
    report = CertificationReport(command="classify", inputs=data.to_json())
    classification = sb.classify(data)
    report.verdicts.append(classification.to_json())
    report.add_check(
        "classification-total", True,
        verdict=classification.verdict,
        theorem_case=classification.theorem_case,
    )
    return report


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pinchcert",
        description="certified pinching thresholds for minimal surfaces in "
                    "spheres, and the self-shrinker rigidity classifier",
    )
    parser.add_argument("--json", metavar="PATH", help="write the JSON report here")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sub.add_parser("certify", help="run the fixed certification suite")

    p_opt = sub.add_parser("optimize", help="sweep the free certificate parameters")
    p_opt.add_argument("--side", choices=("left", "right"), required=True)
    p_opt.add_argument("--config", metavar="PATH", default=None,
                       help="JSON sweep configuration (defaults to the built-in grids)")

    p_lab = sub.add_parser("lab", help="sample a harmonic immersion and verify identities")
    p_lab.add_argument("--s", type=int, required=True, help="harmonic degree (1..6)")
    p_lab.add_argument("--samples", type=int, default=500)
    p_lab.add_argument("--seed", type=int, default=0)
    p_lab.add_argument("--step", type=float, default=1e-3,
                       help="covariant-derivative step in [1e-4, 1e-2]")
    p_lab.add_argument("--csv", metavar="PATH", default=None,
                       help="write the per-sample scan table here")

    p_cls = sub.add_parser("classify", help="apply the rigidity case table")
    p_cls.add_argument("--input", metavar="PATH", default=None,
                       help="JSON file with the pinching data")
    p_cls.add_argument("--min", dest="a_min", default=None,
                       help="lower bound for |A_ring|^2, e.g. 5/12 or 0.45")
    p_cls.add_argument("--max", dest="a_max", default=None, help="upper bound")
    p_cls.add_argument("--h-nonvanishing", action=argparse.BooleanOptionalAction,
                       default=True)
    p_cls.add_argument("--h-parallel", action=argparse.BooleanOptionalAction,
                       default=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        if args.subcommand == "certify":
            report = cmd_certify()
        elif args.subcommand == "optimize":
            config = _load_config(args.side, args.config)
            report = cmd_optimize(args.side, config)
        elif args.subcommand == "lab":
            report = cmd_lab(args.s, args.samples, args.seed, args.step,
                             csv_path=args.csv)
        elif args.subcommand == "classify":
            if args.input is not None:
                with open(args.input, "r", encoding="utf-8") as fh:
                    data = sb.ShrinkerPinchData.from_json(json.load(fh))
            elif args.a_min is not None and args.a_max is not None:
                data = sb.ShrinkerPinchData(
                    a_circ_min=rat(args.a_min),
                    a_circ_max=rat(args.a_max),
                    mean_curvature_nonvanishing=args.h_nonvanishing,
                    normalized_H_parallel=args.h_parallel,
                )
            else:
                print("classify needs --input or both --min and --max", file=sys.stderr)
                return EXIT_USAGE
            report = cmd_classify(data)
        else:  # pragma: no cover - argparse enforces the choices
            return EXIT_USAGE
    except (OSError, json.JSONDecodeError, ValueError, TypeError, KeyError) as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE

    report.wall_time_ms = int((time.perf_counter() - started) * 1000)
    print(report.render_markdown())
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(report.to_json_str())
            fh.write("\n")
    if not report.all_passed:
        print(f"certification failure: {', '.join(report.failing())}", file=sys.stderr)
        return EXIT_CERTIFICATION_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
