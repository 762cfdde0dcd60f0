"""Command-line front end: ``verify``, ``gen-voting`` and ``bench``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Sequence

from .engine import Budget, SynthesisResult, Termination, explore
from .language import Mode, ParseError, parse_model, parse_property
from .model import Network
from .oracle import OracleRefused, enumerate_and_check
from .strategy import binding_rows, render_strategy
from .voting import generate_voting

EXIT_HOLDS, EXIT_FAILS, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3


@dataclass
class RunConfig:
    model_path: str
    property_path: str
    timeout_seconds: float = 120.0
    max_states: int = 0
    output_format: str = "text"
    oracle_cross_check: bool = False
    threads: int = 1
    timing: bool = True

    def __post_init__(self):
        if self.timeout_seconds < 0:
            raise ValueError("timeout must be non-negative (0 disables it)")
        if self.max_states < 0:
            raise ValueError("max-states must be non-negative (0 disables it)")
        if self.output_format not in ("text", "json"):
            raise ValueError(f"unknown output format {self.output_format!r}")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


@dataclass
class BenchPoint:
    v: int
    c: int
    coalition_size: int
    wall_seconds: float
    explored_states: int
    strategy_count: int
    termination: str


def exit_status(result: SynthesisResult) -> int:
    if result.verdict is None:
        return EXIT_INCONCLUSIVE
    return EXIT_HOLDS if result.verdict else EXIT_FAILS


def report_dict(result: SynthesisResult, n: Network, timing: bool = True) -> dict:
    return {
        "mode": result.mode.value,
        "verdict": result.verdict,
        "strategies": [
            {"bindings": [{"agent": g, "location": l, "action": a} for g, l, a in binding_rows(s, n)]}
            for s in result.strategies
        ],
        "stats": {
            "explored": result.stats.explored,
            "frontierPeak": result.stats.frontier_peak,
            "wallSeconds": round(result.stats.wall_seconds, 6) if timing else None,
            "branches": result.stats.branches,
            "satisfyingBranches": result.stats.raw_strategies,
        },
        "termination": result.termination.value,
    }


def render_text(result: SynthesisResult, n: Network, timing: bool = True) -> str:
    verdict = {True: "true", False: "false", None: "unknown"}[result.verdict]
    lines = [f"mode: {result.mode.value}", f"verdict: {verdict}"]
    if result.mode is Mode.SYNTH or result.strategies:
        lines.append(f"strategies: {len(result.strategies)}")
        for k, s in enumerate(result.strategies, 1):
            lines.append(f"strategy {k}:")
            body = render_strategy(s, n)
            lines.extend(f"  {row}" for row in body.splitlines())
            if not body:
                lines.append("  (no choices needed)")
    st = result.stats
    lines.append(f"explored: {st.explored}")
    lines.append(f"frontier peak: {st.frontier_peak}")
    lines.append(f"branches: {st.branches} (satisfying {st.raw_strategies})")
    if timing:
        lines.append(f"wall seconds: {st.wall_seconds:.3f}")
    lines.append(f"termination: {result.termination.value}")
    return "\n".join(lines) + "\n"


def run(config: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        model_text = Path(config.model_path).read_text()
        prop_text = Path(config.property_path).read_text()
    except OSError as exc:
        print(f"error: cannot read {exc.filename}: {exc.strerror}", file=err)
        return EXIT_INPUT
    try:
        n = parse_model(model_text)
    except ParseError as exc:
        for d in exc.diagnostics:
            print(f"{config.model_path}:{d}", file=err)
        return EXIT_INPUT
    try:
        p = parse_property(prop_text, n)
    except ParseError as exc:
        for d in exc.diagnostics:
            print(f"{config.property_path}:{d}", file=err)
        return EXIT_INPUT

    budget = Budget(timeout_seconds=config.timeout_seconds, max_states=config.max_states)
    result = explore(n, p, budget, threads=config.threads)
    status = exit_status(result)

    if config.output_format == "json":
        out.write(json.dumps(report_dict(result, n, config.timing), indent=2) + "\n")
    else:
        out.write(render_text(result, n, config.timing))

    if config.oracle_cross_check:
        try:
            ref = enumerate_and_check(n, p)
        except OracleRefused as exc:
            print(f"oracle: skipped ({exc})", file=err)
        else:
            if not result.complete:
                print("oracle: skipped (exploration incomplete)", file=err)
            elif ref.verdict == result.verdict and (p.mode is Mode.CHECK or ref.strategies == result.strategies):
                print("oracle: agrees", file=err)
            else:
                print("oracle: DISAGREES with the engine", file=err)
                return EXIT_INCONCLUSIVE
    return status


# -- benchmark -------------------------------------------------------------------

def parse_range(text: str) -> List[int]:
    """``"3"``, ``"1..4"`` or ``"1,2,5"`` to a sorted list of positive ints."""
    out = set()
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if lo > hi:
                raise ValueError(f"empty range {part!r}")
            out.update(range(lo, hi + 1))
        elif part:
            out.add(int(part))
    if not out or min(out) < 1:
        raise ValueError(f"invalid range {text!r}")
    return sorted(out)


def bench_point(v: int, c: int, k: int, timeout: float = 120.0, threads: int = 1) -> BenchPoint:
    model, prop = generate_voting(v, c, range(1, k + 1))
    n = parse_model(model)
    p = parse_property(prop, n)
    r = explore(n, p, Budget(timeout_seconds=timeout), threads=threads)
    return BenchPoint(v, c, k, r.stats.wall_seconds, r.stats.explored, len(r.strategies),
                      r.termination.value)


def bench_sweep(voters: Sequence[int], candidates: Sequence[int], sizes: Sequence[int],
                timeout: float = 120.0, threads: int = 1) -> List[BenchPoint]:
    points = []
    for k in sizes:
        for v in voters:
            if k > v:
                continue
            for c in candidates:
                points.append(bench_point(v, c, k, timeout, threads))
    return points


def _cell(pt: Optional[BenchPoint], value: str) -> str:
    if pt is None:
        return "-"
    if pt.termination == Termination.TIMEOUT.value:
        return "timeout"
    if value == "states":
        return str(pt.explored_states)
    if value == "strategies":
        return str(pt.strategy_count)
    return f"{pt.wall_seconds:.2f}"


def render_table(points: Sequence[BenchPoint], value: str = "time") -> str:
    """Grid with rows ``(|A|, v)`` and one column per candidate count."""
    cs = sorted({p.c for p in points})
    rows = sorted({(p.coalition_size, p.v) for p in points})
    at = {(p.coalition_size, p.v, p.c): p for p in points}
    header = ["|A|", "v"] + [f"c={c}" for c in cs]
    body = [[str(k), str(v)] + [_cell(at.get((k, v, c)), value) for c in cs] for k, v in rows]
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]

    def line(cells):
        return "| " + " | ".join(x.rjust(w) for x, w in zip(cells, widths)) + " |"

    rule = "+" + "+".join("-" * (w + 2) for w in widths) + "+"
    return "\n".join([rule, line(header), rule] + [line(r) for r in body] + [rule]) + "\n"


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stctl", description="Strategy synthesis for timed multi-agent systems.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check or synthesise strategies for a property")
    v.add_argument("model")
    v.add_argument("property")
    v.add_argument("--timeout", type=float, default=120.0, help="seconds, 0 for none (default 120)")
    v.add_argument("--max-states", type=int, default=0, help="expansion budget, 0 for none")
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.add_argument("--oracle", action="store_true", help="cross-check with the region-graph oracle")
    v.add_argument("--threads", type=int, default=1)
    v.add_argument("--no-timing", action="store_true", help="omit wall time (reproducible output)")

    g = sub.add_parser("gen-voting", help="write a voting benchmark model and property")
    g.add_argument("--voters", type=int, required=True)
    g.add_argument("--candidates", type=int, required=True)
    g.add_argument("--coalition", default="1", help="comma-separated voter indices")
    g.add_argument("--out", help="directory for voting.model and voting.prop (default: stdout)")

    b = sub.add_parser("bench", help="sweep the voting benchmark")
    b.add_argument("--voters", default="1..2")
    b.add_argument("--candidates", default="1..3")
    b.add_argument("--coalition-sizes", default="1")
    b.add_argument("--timeout", type=float, default=120.0)
    b.add_argument("--threads", type=int, default=1)
    b.add_argument("--cells", choices=("time", "states", "strategies"), default="time")
    b.add_argument("--records", help="also write the points as JSON to this file")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "verify":
            cfg = RunConfig(args.model, args.property, args.timeout, args.max_states,
                            args.format, args.oracle, args.threads, not args.no_timing)
            return run(cfg)
        if args.command == "gen-voting":
            model, prop = generate_voting(args.voters, args.candidates, parse_range(args.coalition))
            if args.out:
                d = Path(args.out)
                d.mkdir(parents=True, exist_ok=True)
                (d / "voting.model").write_text(model)
                (d / "voting.prop").write_text(prop)
            else:
                sys.stdout.write(model + "\n" + prop)
            return 0
        points = bench_sweep(parse_range(args.voters), parse_range(args.candidates),
                             parse_range(args.coalition_sizes), args.timeout, args.threads)
        sys.stdout.write(render_table(points, args.cells))
        if args.records:
            Path(args.records).write_text(json.dumps([asdict(p) for p in points], indent=2) + "\n")
        return 0
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
