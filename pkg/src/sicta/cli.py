"""Command-line front end: ``sicta simulate | exact | sweep | verify``.

Exit codes: 0 success, 1 usage or validation error, 2 runtime failure or a
failed invariant.  Output files are written to a temporary file and renamed
into place, so a failed command leaves nothing behind.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import shlex
import sys
import tempfile
from fractions import Fraction

import numpy as np

from . import __version__
from .analytic import (
    EXACT_N_MAX,
    VARIANTS,
    CompositionBudgetError,
    DEFAULT_BUDGET,
    expected_cri_table,
    yg_closed_form_mst,
)
from .montecarlo import (
    BREAKDOWN_COLUMNS,
    GENERATOR,
    MC_VARIANTS,
    ExperimentConfig,
    ExperimentError,
    breakdown_rows,
    run_experiment,
    run_tree,
    sweep,
)
from .policy import PolicyError, from_name
from .tree import DEFAULT_MAX_DEPTH, TreeDepthError
from .verification import run_verification

RESULT_COLUMNS = (
    "d", "policy", "n", "runs", "seed", "mean_cri", "std", "ci95",
    "throughput_rom", "throughput_mor", "yg_closed_form",
)
SIMULATE_COLUMNS = ("variant",) + RESULT_COLUMNS
EXACT_COLUMNS = ("n", "L_standard", "L_yg", "L_corrected", "T_corrected")

# flags that do not change results and are left out of replay lines
_NOT_REPLAYED = {"threads", "out", "json", "trees_csv", "config", "dump_tree", "command"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _policy_args(p: argparse.ArgumentParser, d_default: int | None = 2) -> None:
    p.add_argument("--d", type=int, default=d_default, help="splitting factor (>= 2)")
    p.add_argument("--policy", default="fair", choices=("fair", "biased", "custom"))
    p.add_argument("--probs", type=_str_list, default=None,
                   help="comma-separated group probabilities for --policy custom")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sicta", description="d-ary tree algorithms with SIC")
    parser.add_argument("--version", action="version", version=f"sicta {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="Monte Carlo CRI lengths for one configuration")
    sim.add_argument("--n", type=int, default=1000, help="initially colliding users")
    _policy_args(sim)
    sim.add_argument("--runs", type=int, default=10_000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--variants", type=_str_list, default=["corrected", "yg", "standard"])
    sim.add_argument("--max-depth", type=int, default=DEFAULT_MAX_DEPTH)
    sim.add_argument("--threads", type=int, default=1)
    sim.add_argument("--out", default="-", help="CSV destination ('-' for stdout)")
    sim.add_argument("--json", default=None, help="also write a JSON summary here")
    sim.add_argument("--trees-csv", default=None, help="write one breakdown row per run here")
    sim.add_argument("--dump-tree", action="store_true", help="print the tree of run 0 to stderr")

    ex = sub.add_parser("exact", help="exact expected CRI lengths L_0..L_nmax")
    ex.add_argument("--nmax", type=int, required=True)
    _policy_args(ex)
    ex.add_argument("--variant", default="all", choices=("all",) + VARIANTS)
    ex.add_argument("--rational", action="store_true", help="exact fractions (nmax <= 64)")
    ex.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    ex.add_argument("--out", default="-")

    sw = sub.add_parser("sweep", help="simulated throughput over splitting factors")
    sw.add_argument("--n", type=int, default=1000)
    sw.add_argument("--d-values", type=_int_list, default=list(range(2, 11)))
    sw.add_argument("--policies", type=_str_list, default=["fair", "biased"])
    sw.add_argument("--runs", type=int, default=10_000)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--max-depth", type=int, default=DEFAULT_MAX_DEPTH)
    sw.add_argument("--threads", type=int, default=1)
    sw.add_argument("--out", default="-")
    sw.add_argument("--json", default=None)

    ver = sub.add_parser("verify", help="run the evaluator and DP invariant suites")
    ver.add_argument("--trees", type=int, default=100_000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--json", default=None)

    for p in (sim, ex, sw, ver):
        p.add_argument("--config", default=None, help="flat key=value file; flags override it")
    return parser


def _config_tokens(path: str, subparser: argparse.ArgumentParser) -> list[str]:
    flags = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                flags[opt[2:].replace("-", "_")] = (opt, action)
    tokens = []
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in flags or key == "config":
            raise UsageError(f"{path}:{lineno}: unknown option {key!r}")
        opt, action = flags[key]
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(opt)
        else:
            tokens += [opt, value]
    return tokens


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        tokens = _config_tokens(args.config, subparser)
        # later occurrences win, so explicit flags override the file
        rest = list(argv)
        rest.remove(args.command)
        args = parser.parse_args([args.command] + tokens + rest)
    return args


def replay_line(args: argparse.Namespace) -> str:
    parts = ["sicta", args.command]
    for key, value in sorted(vars(args).items()):
        if key in _NOT_REPLAYED or value is None or value is False:
            continue
        flag = "--" + key.replace("_", "-")
        if value is True:
            parts.append(flag)
        elif isinstance(value, list):
            parts += [flag, ",".join(str(v) for v in value)]
        else:
            parts += [flag, str(value)]
    return shlex.join(parts)


def _provenance(args) -> list[str]:
    return [
        f"# replay: {replay_line(args)}",
        f"# sicta {__version__}; numpy {np.__version__}; generator: {GENERATOR}",
    ]


def _csv_text(header: list[str], columns, rows) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(line + "\n")
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def atomic_write(path: str, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".sicta-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _policy(args):
    return from_name(args.policy, args.d, args.probs)


def _result_row(variant, policy, summary, s):
    c = summary.config
    return {
        "variant": variant,
        "d": policy.d,
        "policy": policy.label(),
        "n": c.n,
        "runs": c.runs,
        "seed": c.master_seed,
        "mean_cri": _fmt(s.mean),
        "std": _fmt(s.std),
        "ci95": _fmt(s.ci95),
        "throughput_rom": _fmt(s.throughput_ratio_of_means),
        "throughput_mor": _fmt(s.throughput_mean_of_ratios),
        "yg_closed_form": _fmt(yg_closed_form_mst(policy.d)),
    }


def cmd_simulate(args) -> int:
    policy = _policy(args)
    config = ExperimentConfig(
        n=args.n, policy=policy, runs=args.runs, master_seed=args.seed,
        variants=tuple(args.variants), max_depth=args.max_depth,
    )
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    if args.dump_tree:
        print(run_tree(config, 0).dump(), file=sys.stderr)
    summary = run_experiment(config, threads=args.threads)
    rows = [_result_row(v, policy, summary, summary[v]) for v in config.variants]
    outputs = [(args.out, _csv_text(_provenance(args), SIMULATE_COLUMNS, rows))]
    if args.trees_csv:
        outputs.append((args.trees_csv,
                        _csv_text(_provenance(args), BREAKDOWN_COLUMNS, breakdown_rows(config))))
    if args.json:
        meta = _json_meta(args, summary.wall_time)
        outputs.append((args.json, json.dumps({"metadata": meta, "rows": rows}, indent=2) + "\n"))
    for path, text in outputs:
        atomic_write(path, text)
    return 0


def _json_meta(args, wall_time):
    return {
        "replay": replay_line(args),
        "sicta_version": __version__,
        "numpy_version": np.__version__,
        "generator": GENERATOR,
        "wall_time": wall_time,
    }


def cmd_exact(args) -> int:
    if args.rational and args.nmax > EXACT_N_MAX:
        raise UsageError(f"--rational supports --nmax up to {EXACT_N_MAX}")
    policy = _policy(args)
    variants = VARIANTS if args.variant == "all" else (args.variant,)
    tables = {
        v: expected_cri_table(args.nmax, policy, v, exact=args.rational, budget=args.budget)
        for v in variants
    }
    rows = []
    for n in range(args.nmax + 1):
        row = {"n": n}
        for v in VARIANTS:
            row[f"L_{v}"] = _fmt(tables[v][n]) if v in tables else ""
        if "corrected" in tables:
            L = tables["corrected"][n]
            row["T_corrected"] = _fmt(Fraction(n) / L if args.rational else n / L)
        else:
            row["T_corrected"] = ""
        rows.append(row)
    atomic_write(args.out, _csv_text(_provenance(args), EXACT_COLUMNS, rows))
    return 0


def cmd_sweep(args) -> int:
    for d in args.d_values:
        if d < 2:
            raise UsageError(f"splitting factor d must be >= 2, got {d}")
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    base = ExperimentConfig(
        n=args.n, policy=from_name("fair", 2), runs=args.runs,
        master_seed=args.seed, max_depth=args.max_depth,
    )
    result = sweep(args.d_values, args.policies, base, threads=args.threads)
    rows = []
    for r in result:
        rows.append({k: v for k, v in _result_row("corrected", r.summary.config.policy,
                                                  r.summary, r.summary["corrected"]).items()
                     if k != "variant"})
    outputs = [(args.out, _csv_text(_provenance(args), RESULT_COLUMNS, rows))]
    if args.json:
        meta = _json_meta(args, sum(r.summary.wall_time for r in result))
        outputs.append((args.json, json.dumps({"metadata": meta, "rows": rows}, indent=2) + "\n"))
    for path, text in outputs:
        atomic_write(path, text)
    return 0


def cmd_verify(args) -> int:
    report = run_verification(args.trees, args.seed)
    for line in report.lines():
        print(line)
    if args.json:
        atomic_write(args.json, json.dumps(report.to_dict(), indent=2, default=str) + "\n")
    return 0 if report.passed else 2


COMMANDS = {"simulate": cmd_simulate, "exact": cmd_exact, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, PolicyError, ValueError) as exc:
        print(f"sicta: error: {exc}", file=sys.stderr)
        return 1
    except (ExperimentError, TreeDepthError, CompositionBudgetError) as exc:
        print(f"sicta: failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
