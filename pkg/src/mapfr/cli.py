"""Command-line front end: solve, validate, classify, oracle, demos, gen.

Exit codes: 0 solved/clean, 1 usage, IO, or structural error, 2 search
budget exhausted, 3 infeasible (or nothing within the oracle bound), 4 the
validated solution has collisions.  Reports go to stdout, diagnostics to
stderr.  Reports are byte-identical across repeated runs on identical
inputs (wall-clock timings are deliberately excluded).
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from dataclasses import dataclass
from pathlib import Path

from .ccbs import SearchBudget, SearchOutcome, oracle_dt, solve
from .demos import DEMOS
from .fixtures import random_dt_instance, random_instance
from .io import ParseError, _fmt, load_scenario, load_solution, save_scenario, save_solution
from .model import (
    Instance,
    Solution,
    StructuralError,
    classify,
    validate_instance,
    validate_solution,
)

__all__ = [
    "EXIT_CONFLICTS",
    "EXIT_ERROR",
    "EXIT_EXHAUSTED",
    "EXIT_INFEASIBLE",
    "EXIT_OK",
    "RunReport",
    "main",
]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_EXHAUSTED = 2
EXIT_INFEASIBLE = 3
EXIT_CONFLICTS = 4

REPORT_HEADER = "mapfr-report v1"

# CLI flag spelling -> internal mode name.
_MODES = {
    "motion": "motion",
    "vertex-range": "vertex_range",
    "shifting": "shifting",
    "dt": "dt",
}

_STATUS_EXIT = {
    "solved": EXIT_OK,
    "budget_exhausted": EXIT_EXHAUSTED,
    "infeasible": EXIT_INFEASIBLE,
}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract reserves 2 for budget
    exhaustion, so usage errors are remapped to 1."""

    def error(self, message: str) -> None:  # noqa: D401 - argparse hook
        self.print_usage(sys.stderr)
        raise SystemExit(self._fail(message))

    @staticmethod
    def _fail(message: str) -> int:
        print(f"error: {message}", file=sys.stderr)
        return EXIT_ERROR


def _delta_rule(text: str) -> str:
    if text in ("half", "zero"):
        return text
    if text.startswith("fixed:"):
        try:
            float(text.split(":", 1)[1])
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"fixed delta needs a real number, got {text!r}"
            ) from None
        return text
    raise argparse.ArgumentTypeError(
        f"expected half, zero, or fixed:<real>, got {text!r}"
    )


def _load_instance(path: str) -> tuple[str, Instance]:
    """Read and validate a scenario file; raises CliError with exit 1."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read scenario {path!r}: {exc}") from exc
    try:
        inst = load_scenario(text)
    except ParseError as exc:
        raise CliError(f"scenario {path!r}: {exc}") from exc
    problems = validate_instance(inst)
    if problems:
        raise CliError(
            f"scenario {path!r} does not validate: " + "; ".join(problems)
        )
    return text, inst


class CliError(Exception):
    """A usage/IO/structural failure; message goes to stderr, exit 1."""


@dataclass(frozen=True)
class RunReport:
    """Deterministic solve report: digest, mode, outcome, stats, per-agent
    plan table, and (when solved) a machine block that round-trips through
    the solution loader."""

    digest: str
    mode: str
    status: str
    summary: tuple[tuple[str, str], ...]
    plan_rows: tuple[tuple[str, str, str], ...]
    machine_block: str | None

    def render(self) -> str:
        out = [
            REPORT_HEADER,
            f"scenario sha256:{self.digest}",
            f"mode {self.mode}",
            f"status {self.status}",
        ]
        out.extend(f"{key} {value}" for key, value in self.summary)
        if self.plan_rows:
            rows = [("agent", "motions", "completion"), *self.plan_rows]
            widths = [max(len(r[c]) for r in rows) for c in range(3)]
            out.append("")
            out.extend(
                "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
                for row in rows
            )
        if self.machine_block is not None:
            out.extend(["", self.machine_block.rstrip("\n")])
        return "\n".join(out) + "\n"


def _report(scenario_text: str, mode_flag: str, outcome: SearchOutcome) -> RunReport:
    digest = hashlib.sha256(scenario_text.encode()).hexdigest()[:16]
    summary: list[tuple[str, str]] = []
    if outcome.solved:
        summary.append(("cost", _fmt(outcome.g)))
    elif outcome.exhausted and outcome.best_lower_bound is not None:
        summary.append(("lower-bound", _fmt(outcome.best_lower_bound)))
    stats = outcome.stats
    summary.extend(
        [
            ("expansions", str(stats.expansions)),
            ("generated", str(stats.generated)),
            ("conflicts-resolved", str(stats.conflicts_resolved)),
            ("frontier", str(stats.frontier_size)),
        ]
    )
    plan_rows: tuple[tuple[str, str, str], ...] = ()
    machine_block: str | None = None
    if outcome.solution is not None:
        plan_rows = tuple(
            (p.agent, str(len(p.motions)), _fmt(p.completion_time))
            for p in outcome.solution.plans
        )
        machine_block = save_solution(outcome.solution)
    return RunReport(digest, mode_flag, outcome.status, tuple(summary), plan_rows, machine_block)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_solve(args: argparse.Namespace) -> int:
    scenario_text, inst = _load_instance(args.scenario)
    budget = SearchBudget(max_expansions=args.budget, max_seconds=args.timeout)
    trace_lines: list[str] = []
    on_expand = trace_lines.append if args.trace else None
    outcome = solve(
        inst,
        _MODES[args.mode],
        budget,
        unit=args.unit,
        delta_rule=args.delta_rule,
        on_expand=on_expand,
    )
    if args.trace:
        try:
            Path(args.trace).write_text("\n".join(trace_lines) + "\n")
        except OSError as exc:
            raise CliError(f"cannot write trace {args.trace!r}: {exc}") from exc
    report = _report(scenario_text, args.mode, outcome)
    sys.stdout.write(report.render())
    if outcome.solved:
        out_path = Path(args.out) if args.out else Path(args.scenario).with_suffix(".sol")
        try:
            out_path.write_text(report.machine_block)
        except OSError as exc:
            raise CliError(f"cannot write solution {str(out_path)!r}: {exc}") from exc
        print(f"solution written to {out_path}", file=sys.stderr)
    return _STATUS_EXIT[outcome.status]


def cmd_validate(args: argparse.Namespace) -> int:
    _, inst = _load_instance(args.scenario)
    try:
        text = Path(args.solution).read_text()
    except OSError as exc:
        raise CliError(f"cannot read solution {args.solution!r}: {exc}") from exc
    try:
        sol = load_solution(text)
    except ParseError as exc:
        raise CliError(f"solution {args.solution!r}: {exc}") from exc
    try:
        conflicts = validate_solution(inst, sol)
    except StructuralError as exc:
        raise CliError(f"structural error: {exc}") from exc
    print(f"{len(conflicts)} conflicts, SIC={_fmt(sol.sic)}")
    for c in conflicts:
        print(
            f"  {c.agent_a}:{c.index_a} x {c.agent_b}:{c.index_b} "
            f"during ({_fmt(c.interval.lo)}, {_fmt(c.interval.hi)})"
        )
    return EXIT_CONFLICTS if conflicts else EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    _, inst = _load_instance(args.scenario)
    report = classify(inst)
    print(f"class {report.label}")
    for v, e in report.edge_witnesses:
        print(f"  edge-overlap: wait at {v} blocks {e.u}-{e.v}")
    for v1, v2 in report.vertex_witnesses:
        print(f"  vertex-overlap: {v1} and {v2} closer than two radii")
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    _, inst = _load_instance(args.scenario)
    try:
        best = oracle_dt(inst, args.unit, bound=args.bound)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if best is None:
        print(f"no solution with SIC <= {_fmt(args.bound)}")
        return EXIT_INFEASIBLE
    print(f"optimal SIC {_fmt(best.sic)}")
    sys.stdout.write(save_solution(best))
    return EXIT_OK


def cmd_demo(args: argparse.Namespace) -> int:
    demo = DEMOS[args.name]
    kwargs = {}
    if args.budget is not None:
        if args.name == "fig2-unsound":
            raise CliError("demo fig2-unsound runs no search and takes no budget")
        kwargs["budget"] = args.budget
    if args.name == "shifting":
        kwargs["delta_rule"] = args.delta_rule
    report = demo(**kwargs)
    sys.stdout.write(report.render())
    return EXIT_OK if report.passed else EXIT_ERROR


def cmd_gen(args: argparse.Namespace) -> int:
    maker = random_dt_instance if args.kind == "dt" else random_instance
    text = save_scenario(maker(args.seed))
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise CliError(f"cannot write scenario {args.out!r}: {exc}") from exc
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="mapfr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run the constraint-tree search on a scenario")
    p_solve.add_argument("scenario", help="scenario file (*.scn)")
    p_solve.add_argument("--mode", required=True, choices=sorted(_MODES))
    p_solve.add_argument("--unit", type=float, default=1.0, help="wait quantum for dt mode")
    p_solve.add_argument("--delta-rule", type=_delta_rule, default="half",
                         help="shifting-mode delta: half, zero, or fixed:<real>")
    p_solve.add_argument("--budget", type=int, default=100_000, help="max expansions")
    p_solve.add_argument("--timeout", type=float, default=60.0, help="max seconds")
    p_solve.add_argument("--trace", help="write one line per expansion to this path")
    p_solve.add_argument("--out", help="solution file path (default: scenario with .sol)")
    p_solve.set_defaults(run=cmd_solve)

    p_val = sub.add_parser("validate", help="check a solution file against a scenario")
    p_val.add_argument("scenario")
    p_val.add_argument("solution")
    p_val.set_defaults(run=cmd_validate)

    p_cls = sub.add_parser("classify", help="report the overlap class and witnesses")
    p_cls.add_argument("scenario")
    p_cls.set_defaults(run=cmd_classify)

    p_orc = sub.add_parser("oracle", help="brute-force optimal SIC on the unit-wait lattice")
    p_orc.add_argument("scenario")
    p_orc.add_argument("--unit", type=float, default=1.0)
    p_orc.add_argument("--bound", type=float, required=True, help="finite SIC bound")
    p_orc.set_defaults(run=cmd_oracle)

    p_demo = sub.add_parser("demo", help="run a self-checking demonstration")
    p_demo.add_argument("name", choices=sorted(DEMOS))
    p_demo.add_argument("--budget", type=int, help="override the demo's search budget")
    p_demo.add_argument("--delta-rule", type=_delta_rule, default="half",
                        help="delta rule for the shifting demo")
    p_demo.set_defaults(run=cmd_demo)

    p_gen = sub.add_parser("gen", help="emit a random scenario")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--kind", choices=("continuous", "dt"), default="continuous")
    p_gen.add_argument("--out", help="write here instead of stdout")
    p_gen.set_defaults(run=cmd_gen)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage error (1) or --help (0)
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    try:
        return args.run(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
