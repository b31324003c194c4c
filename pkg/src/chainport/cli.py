"""Command-line front end.

    chainport run --family two-way-vaa --n 2 --seed 7 --trials 100
    chainport verify --n 3
    chainport derive-corrections --family chain --n 2 --out table.json
    chainport stats --n 2 --trials 10000 --out hist.json

Reports are JSON with a fixed key order and floats rounded to 12 significant
digits, so identical configurations give byte-identical files. Exit codes:
0 ok, 2 configuration error, 3 size limit, 4 verification/validation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import FIDELITY_TOL, FULL_MODE_MAX_N, REPORT_DIGITS, VERIFY_TOL
from .corrections import CorrectionTable, derive_table, validate_table
from .errors import ConfigError, NoPauliCorrection, SizeLimitError, ValidationFailure
from .inputs import haar_joint_state, load_inputs, random_product_inputs
from .protocol import ProtocolSpec, enumerate_protocol_branches, run_trial
from . import verify

EXIT_OK, EXIT_CONFIG, EXIT_SIZE, EXIT_FAIL = 0, 2, 3, 4
INPUT_SOURCES = ("random-product", "random-entangled", "file")

log = logging.getLogger("chainport")


@dataclass(frozen=True)
class RunConfig:
    n: int = 2
    family: str = "chain"
    end_link: str = "z"
    sim_mode: str = "full"
    seed: int = 0
    trials: int = 1
    input_source: str = "random-product"
    input_path: str | None = None
    correction_table_path: str | None = None
    output_path: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.input_source not in INPUT_SOURCES:
            raise ConfigError(f"inputs must be one of {INPUT_SOURCES}")
        if self.input_source == "file" and not self.input_path:
            raise ConfigError("--inputs file requires --input-path")

    @property
    def spec(self) -> ProtocolSpec:
        return ProtocolSpec(self.n, self.family, self.end_link, self.sim_mode)


class _Inputs:
    """Per-trial spin inputs drawn from a dedicated stream of the run seed."""

    def __init__(self, config: RunConfig, rng: np.random.Generator):
        self.config = config
        self.rng = rng
        self.fixed = load_inputs(config.input_path, config.n) if config.input_source == "file" else None

    def next(self):
        if self.fixed is not None:
            return self.fixed
        if self.config.input_source == "random-entangled":
            return haar_joint_state(self.config.n, self.rng)
        return random_product_inputs(self.config.n, self.rng)


def _streams(seed: int):
    inputs_ss, measure_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(inputs_ss), np.random.default_rng(measure_ss)


def _clean(obj):
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.{REPORT_DIGITS}g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _dkey(d) -> str:
    return "".join(str(v) for v in d)


def _header(command: str, config: RunConfig) -> dict:
    return {
        "tool": "chainport",
        "version": __version__,
        "command": command,
        "fingerprint": config.spec.fingerprint(),
        "config": {
            "n": config.n,
            "family": config.family,
            "end_link": config.end_link,
            "mode": config.sim_mode,
            "seed": config.seed,
            "trials": config.trials,
            "inputs": config.input_source,
            "input_path": config.input_path,
            "table": config.correction_table_path,
        },
    }


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(_clean(report), indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_or_derive(config: RunConfig):
    """Returns (table or None, corrections block for the report)."""
    spec = config.spec
    if config.correction_table_path:
        p = Path(config.correction_table_path)
        if not p.is_file():
            raise ConfigError(f"correction table not found: {p}")
        table = CorrectionTable.read(p)
        table.check_spec(spec)
        return table, {"source": "file", "status": "ok"}
    try:
        table = derive_table(spec)
    except NoPauliCorrection as exc:
        return None, {"source": "derived", "status": "no-pauli-correction", "detail": str(exc)}
    return table, {"source": "derived", "status": "ok", "entries": {_dkey(d): "".join(l) for d, l in sorted(table.entries.items())}}


def cmd_run(config: RunConfig) -> int:
    spec = config.spec
    spec.check_size()
    table, corr = _load_or_derive(config)
    in_rng, m_rng = _streams(config.seed)
    inputs = _Inputs(config, in_rng)
    rows = []
    for k in range(config.trials):
        res = run_trial(spec, inputs.next(), m_rng, table=table)
        rows.append(
            {
                "trial": k,
                "d": list(res.outcome.d),
                "raw_q": list(res.outcome.raw_q),
                "raw_q_prime": list(res.outcome.raw_q_prime),
                "prob": res.prob,
                "fidelity_before": res.fidelity_before_correction,
                "fidelity_after": res.fidelity_to_target if table is not None else None,
            }
        )
    before = [r["fidelity_before"] for r in rows]
    after = [r["fidelity_after"] for r in rows if r["fidelity_after"] is not None]
    unsupported = sum(1 for r in rows if any(v not in (0, 2) for v in r["d"]))
    corrected_ok = table is not None and min(after) >= 1 - FIDELITY_TOL
    classes = {}
    for r in rows:
        classes[_dkey(r["d"])] = classes.get(_dkey(r["d"]), 0) + 1
    summary = {
        "trials": config.trials,
        "class_counts": dict(sorted(classes.items())),
        "unsupported_outcomes": unsupported,
        "min_fidelity_before": min(before),
        "mean_fidelity_before": float(np.mean(before)),
        "min_fidelity_after": min(after) if after else None,
        "all_corrected": corrected_ok,
        "pass": corrected_ok and unsupported == 0,
    }
    _emit({"header": _header("run", config), "corrections": corr, "trials": rows, "summary": summary}, config.output_path)
    return EXIT_OK if summary["pass"] else EXIT_FAIL


def cmd_verify(config: RunConfig) -> int:
    spec = config.spec
    spec.check_size()
    in_rng, _ = _streams(config.seed)
    inputs = random_product_inputs(spec.n, in_rng)
    results = {}

    branches = enumerate_protocol_branches(spec, inputs)
    total = sum(b.prob for b in branches)
    results["enumeration"] = {
        "branches": len(branches),
        "classes": len({b.d for b in branches}),
        "prob_sum": total,
        "pass": abs(total - 1) < FIDELITY_TOL,
    }
    results["outcome_support"] = {"pass": all(all(v in (0, 2) for v in b.d) for b in branches)}

    worst_ptr, worst_remote, ns_ok = 0.0, 0.0, True
    for r in range(spec.n):
        variant = list(inputs)
        variant[r] = random_product_inputs(1, in_rng)[0]
        rep = verify.check_no_signaling(spec, inputs, variant)
        worst_ptr = max(worst_ptr, rep.max_pointer_deviation)
        worst_remote = max(worst_remote, rep.max_remote_trace_distance)
        ns_ok = ns_ok and rep.pass_
    results["no_signaling"] = {
        "max_pointer_deviation": worst_ptr,
        "max_remote_trace_distance": worst_remote,
        "pointers_checked": spec.sim_mode == "full",
        "pass": ns_ok,
    }

    if spec.n <= FULL_MODE_MAX_N:
        disc = verify.cross_check_modes(spec, inputs)
        results["mode_cross_check"] = {"max_discrepancy": disc, "pass": disc < VERIFY_TOL}
    else:
        results["mode_cross_check"] = {"skipped": f"full mode limited to n <= {FULL_MODE_MAX_N}", "pass": True}

    diagnostics = {}
    kr = verify.kraus_report(spec)
    diagnostics["branch_operators"] = {
        "all_unitary": kr.all_unitary,
        "max_unitarity_deviation": max(kr.unitarity.values()),
        "zero_branch_overlap_with_cycle": kr.zero_branch_overlap,
        "zero_branch_completes": kr.zero_branch_completes,
        "zero_branch_residual": {k: [v.real, v.imag] for k, v in kr.zero_branch_residual.items()},
    }
    if spec.n <= FULL_MODE_MAX_N:
        diagnostics["pairing"] = [
            {"combination": c.name, "deterministic": c.deterministic, "spin_observable_mismatch": c.spin_observable_mismatch}
            for c in verify.check_difference_pairing(spec, inputs)
        ]

    ok = all(v["pass"] for v in results.values())
    _emit({"header": _header("verify", config), "checks": results, "diagnostics": diagnostics, "pass": ok}, config.output_path)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_derive_corrections(config: RunConfig) -> int:
    spec = config.spec
    spec.check_size()
    try:
        table = derive_table(spec)
        report = validate_table(spec, table, seed=config.seed)
    except (NoPauliCorrection, ValidationFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = table.dumps()
    if config.output_path:
        Path(config.output_path).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"entries: {len(table.entries)}; checks: {report.checks}; "
          f"worst corrected infidelity: {1 - report.worst_fidelity:.3e}", file=sys.stderr)
    return EXIT_OK


def cmd_stats(config: RunConfig) -> int:
    spec = config.spec
    spec.check_size()
    in_rng, _ = _streams(config.seed)
    inputs = _Inputs(config, in_rng).next()
    hist = verify.outcome_statistics(spec, inputs, config.trials, config.seed)
    keys = sorted(set(hist.counts) | set(hist.expected))
    rows = [
        {"d": _dkey(d), "count": hist.counts.get(d, 0), "frequency": hist.counts.get(d, 0) / hist.total,
         "expected": hist.expected.get(d)}
        for d in keys
    ]
    ok = hist.within_sigma(5.0) and all(all(v in (0, 2) for v in d) for d in hist.counts)
    report = {
        "header": _header("stats", config),
        "histogram": rows,
        "total": hist.total,
        "chi2": hist.chi2,
        "p_value": hist.p_value,
        "max_sigma": hist.max_sigma,
        "pass": ok,
    }
    _emit(report, config.output_path)
    if config.output_path:
        lines = ["d\tcount\tfrequency\texpected"]
        for r in _clean(rows):
            lines.append(f"{r['d']}\t{r['count']}\t{r['frequency']}\t{r['expected']}")
        Path(config.output_path).with_suffix(".tsv").write_text("\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "run": cmd_run,
    "verify": cmd_verify,
    "derive-corrections": cmd_derive_corrections,
    "stats": cmd_stats,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chainport", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"chainport {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, allow_abbrev=False)
        p.add_argument("--family", choices=["two-way-vaa", "chain"], default="chain")
        p.add_argument("--n", type=int, default=2)
        p.add_argument("--end-link", choices=["z", "x", "y", "auto"], default="z")
        p.add_argument("--mode", choices=["full", "compact"], default="full")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trials", type=int, default=1 if name != "stats" else 10000)
        p.add_argument("--inputs", choices=list(INPUT_SOURCES), default="random-product")
        p.add_argument("--input-path")
        p.add_argument("--table")
        p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig(
            n=args.n,
            family=args.family,
            end_link=args.end_link,
            sim_mode=args.mode,
            seed=args.seed,
            trials=args.trials,
            input_source=args.inputs,
            input_path=args.input_path,
            correction_table_path=args.table,
            output_path=args.out,
        )
        return COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SizeLimitError as exc:
        print(f"size limit: {exc}", file=sys.stderr)
        return EXIT_SIZE


if __name__ == "__main__":
    sys.exit(main())
