"""Command-line entry point: ``altcsit {table1,simulate,rate-sweep}``.

Exit status: 0 when every check passes, 1 when a check fails (classification
mismatch, decode failure, slope outside the acceptance window), 2 for usage
errors and non-synergistic patterns, 3 for I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .channel import CsitPattern, lambda_of
from .metrics import baseline_mix, rate_sweep
from .patterns import classify, enumerate_candidates
from .pipeline import simulate
from .scheme import TABLE1, NotSynergistic
from .tolerances import Tolerances

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
SLOPE_WINDOW = (1.20, 1.30)
TARGET_DOF = Fraction(5, 4)


@dataclass
class ExperimentConfig:
    command: str
    pattern: Optional[CsitPattern]
    seed: int
    trials: int
    noise_power: float
    power_min_exp: float
    power_max_exp: float
    power_points: int
    fmt: str
    out: Optional[str]
    allow_dissociative: bool
    tolerances: Tolerances

    @property
    def powers(self) -> np.ndarray:
        return 2.0 ** np.linspace(self.power_min_exp, self.power_max_exp, self.power_points)


def fmt_number(x) -> str:
    """Twelve significant digits; complex values as ``re+imj``."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (complex, np.complexfloating)):
        return f"{x.real:.12g}{x.imag:+.12g}j"
    if isinstance(x, (float, np.floating)):
        return f"{x:.12g}"
    return "" if x is None else str(x)


def render(command: str, rows: list[dict], summary: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"command": command, "rows": rows, "summary": summary},
                          indent=2, default=_json_default) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: fmt_number(v) for k, v in row.items()})
    for key, value in summary.items():
        buf.write(f"# {key}: {fmt_number(value)}\n")
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Fraction):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _clean(value):
    """Map numpy scalars and non-finite floats onto JSON-friendly values."""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def cmd_table1(cfg: ExperimentConfig):
    rows = []
    found = {}
    for pattern in enumerate_candidates():
        res = classify(pattern)
        lam = lambda_of(pattern)
        roles = res.case.roles if res.case else None
        rows.append({
            "pattern": str(pattern),
            "receiver1": "".join(s.value for s in pattern.receiver_states(1)),
            "receiver2": "".join(s.value for s in pattern.receiver_states(2)),
            "verdict": res.verdict,
            "case": int(res.case.case) if res.case else None,
            "mirrored": bool(res.case.mirrored) if res.case else None,
            "failed_condition": res.failed_condition,
            "lambda_p": str(lam.lambda_p),
            "lambda_d": str(lam.lambda_d),
            "lambda_n": str(lam.lambda_n),
            "slot_roles": "|".join(roles.label(t) for t in range(1, 5)) if roles else "",
        })
        if res.synergistic:
            found[str(pattern)] = res.case.case
    matches = found == TABLE1
    summary = {"candidates": len(rows), "synergistic": len(found),
               "dissociative": len(rows) - len(found), "matches_table1": matches}
    return rows, summary, EXIT_OK if matches else EXIT_CHECK


def _require_pattern(cfg: ExperimentConfig) -> CsitPattern:
    if cfg.pattern is None:
        raise UsageError("--pattern is required for this command")
    return cfg.pattern


class UsageError(Exception):
    pass


def _dissociative_report(pattern: CsitPattern):
    res = classify(pattern)
    rows = [{"pattern": str(pattern), "verdict": res.verdict,
             "failed_condition": res.failed_condition, "detail": res.detail}]
    return rows, {"pattern": str(pattern), "synergistic": False}, EXIT_CHECK


def cmd_simulate(cfg: ExperimentConfig):
    pattern = _require_pattern(cfg)
    if cfg.trials < 1:
        raise UsageError("--trials must be at least 1")
    if cfg.noise_power < 0:
        raise UsageError("--noise-power must be nonnegative")
    try:
        sim = simulate(pattern, cfg.trials, cfg.seed, cfg.noise_power, cfg.tolerances)
    except NotSynergistic:
        if cfg.allow_dissociative:
            return _dissociative_report(pattern)
        raise
    rep = sim.report
    rows = []
    for k in range(sim.trials):
        rows.append({
            "trial": k,
            "decoded": bool(sim.decoded[k]),
            "symbols_delivered": int(sim.delivered[k]),
            "residual_u": _clean(rep.residual_u[k]),
            "residual_v": _clean(rep.residual_v[k]),
            "error_u": _clean(rep.error_u[k]) if rep.error_u is not None else None,
            "error_v": _clean(rep.error_v[k]) if rep.error_v is not None else None,
            "cond_u": _clean(rep.cond_u[k]),
            "cond_v": _clean(rep.cond_v[k]),
            "leakage": _clean(sim.leakage[k]),
            "rank1": int(sim.rank1[k]),
            "rank2": int(sim.rank2[k]),
        })
    dof = sim.dof()
    passed = (rep.audit["forbidden"] == 0 and not rep.singular.any()
              and bool(np.all(sim.decoded)))
    summary = {
        "pattern": str(pattern),
        "case": int(sim.case.case),
        "mirrored": sim.case.mirrored,
        "trials": sim.trials,
        "seed": cfg.seed,
        "noise_power": cfg.noise_power,
        "success_rate": sim.success_rate,
        "dof": str(dof),
        "csit_reads": rep.audit["reads"],
        "forbidden_reads": rep.audit["forbidden"],
        "singular_blocks": int(rep.singular.sum()),
        "oracle_full_rank": int(sim.oracle_full.sum()),
        "passed": passed,
    }
    return rows, summary, EXIT_OK if passed else EXIT_CHECK


def cmd_rate_sweep(cfg: ExperimentConfig):
    pattern = _require_pattern(cfg)
    if cfg.power_points < 2:
        raise UsageError("--power-points must be at least 2 to fit a slope")
    if cfg.power_max_exp <= cfg.power_min_exp:
        raise UsageError("--power-max-exp must exceed --power-min-exp")
    if cfg.trials < 1:
        raise UsageError("--trials must be at least 1")
    try:
        sweep = rate_sweep(pattern, cfg.powers, cfg.trials, cfg.seed, cfg.tolerances)
    except NotSynergistic:
        if cfg.allow_dissociative:
            return _dissociative_report(pattern)
        raise
    baseline = baseline_mix(lambda_of(pattern))
    in_window = SLOPE_WINDOW[0] <= sweep.slope <= SLOPE_WINDOW[1]
    summary = {
        "pattern": str(pattern),
        "trials": sweep.trials,
        "seed": cfg.seed,
        "slope": sweep.slope,
        "top_half_slope": sweep.top_half_slope(),
        "intercept": sweep.intercept,
        "resampled_blocks": sweep.resample_count,
        "target_dof": str(TARGET_DOF),
        "baseline": str(baseline),
        "baseline_below_target": baseline < TARGET_DOF,
        "slope_in_window": in_window,
    }
    return sweep.rows(), summary, EXIT_OK if in_window else EXIT_CHECK


COMMANDS = {"table1": cmd_table1, "simulate": cmd_simulate, "rate-sweep": cmd_rate_sweep}


def _pattern_arg(text: str) -> CsitPattern:
    try:
        pattern = CsitPattern.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if pattern.n != 4:
        raise argparse.ArgumentTypeError(f"pattern must have four slots, got {pattern.n}")
    return pattern


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="altcsit", description="Two-user SISO X-channel with alternating CSIT.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pattern", type=_pattern_arg,
                        help='CSIT pattern such as "DD,ND,PN,NN"')
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=1000)
    common.add_argument("--noise-power", type=float, default=0.0)
    common.add_argument("--power-min-exp", type=float, default=20.0)
    common.add_argument("--power-max-exp", type=float, default=40.0)
    common.add_argument("--power-points", type=int, default=5)
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--allow-dissociative", action="store_true",
                        help="report the classifier verdict instead of failing on "
                             "non-synergistic patterns")
    common.add_argument("--decode-tol", type=float, default=Tolerances.decode)
    common.add_argument("--cancel-tol", type=float, default=Tolerances.cancel)
    common.add_argument("--cond-limit", type=float, default=Tolerances.cond_limit)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("table1", parents=[common], help="classify the 18 candidate patterns")
    sub.add_parser("simulate", parents=[common], help="noise-free or noisy decoding trials")
    sub.add_parser("rate-sweep", parents=[common], help="sum rate versus power and its slope")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    tol = Tolerances(decode=args.decode_tol, cancel=args.cancel_tol, cond_limit=args.cond_limit)
    return ExperimentConfig(args.command, args.pattern, args.seed, args.trials, args.noise_power,
                            args.power_min_exp, args.power_max_exp, args.power_points,
                            args.fmt, args.out, args.allow_dissociative, tol)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = config_from_args(args)
    try:
        rows, summary, status = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"altcsit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotSynergistic as exc:
        print(f"altcsit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(cfg.command, rows, summary, cfg.fmt)
    try:
        if cfg.out:
            with open(cfg.out, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"altcsit: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return status


if __name__ == "__main__":
    sys.exit(main())
