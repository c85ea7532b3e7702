"""Command-line entry point: ``semigen <command> ...``.

Commands: validate, generate, expand, measure, selfcheck.  Output is JSON
(sorted keys) on stdout or in the ``--out`` file.  Exit status 0 on success,
1 when the input fails validation (or a self-check fails), 2 on usage errors.
Set ``SEMIGEN_LOG`` to a logging level name (e.g. ``INFO``) for progress
messages on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .core import Violation, read_raw, find_violation, to_dot
from .errors import ScaleExceeded, SemigenericError
from .extension import build_generic
from .measure import Cylinder, UCylinder, VCylinder, brute_measure, estimate, mu0_cyl
from .selfcheck import run_selfcheck
from .star import (
    DEFAULT_MAX_EXPANSIONS,
    StarExpansion,
    check_star,
    enumerate_expansions,
    expansion_count_formula,
)

log = logging.getLogger("semigeneric")

RANDOMIZED = {"generate"}


class UsageError(Exception):
    """Bad command line; the message names the offending flag."""


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    output: str | None = None
    seed: int | None = None
    max_vertices: int = 200
    max_columns: int = 200
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.command in RANDOMIZED and self.seed is None:
            raise UsageError(f"--seed is required for {self.command}")
        if self.max_vertices <= 0:
            raise UsageError("--max-vertices must be positive")
        if self.max_columns <= 0:
            raise UsageError("--max-columns must be positive")
        if self.jobs <= 0:
            raise UsageError("--jobs must be positive")


def _fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_json(path: str, flag: str = "input") -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"{flag}: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{flag}: {path} is not JSON ({exc.msg})") from None


def _load_graph(cfg: RunConfig):
    """Parse the input file; returns (graph, violation-or-None)."""
    data = _load_json(cfg.input)
    if not isinstance(data, dict) or "vertices" not in data or "edges" not in data:
        raise UsageError("input: expected an object with 'vertices' and 'edges'")
    g = read_raw(data["vertices"], data["edges"])
    if len(g) > cfg.max_vertices:
        raise UsageError(f"--max-vertices: input has {len(g)} vertices")
    violation = find_violation(g)
    if violation is None and len(g.columns) > cfg.max_columns:
        raise UsageError(f"--max-columns: input has {len(g.columns)} columns")
    return g, violation


def _invalid(violation: Violation, cfg: RunConfig) -> int:
    _emit({"valid": False, "violation": violation.to_json()}, cfg.output)
    return 1


def _parse_points(text: str, flag: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"{flag}: vertex ids must be integers, got {text!r}") from None


def parse_u(text: str) -> UCylinder:
    """``"3,0,5;eps=1,0,1"`` (or ``eps=101``): base points in column order and
    one bit per pair, pairs in lexicographic order."""
    head, _, tail = text.partition(";")
    points = _parse_points(head, "--u")
    bits: list[int] = []
    if tail:
        key, _, value = tail.partition("=")
        if key.strip() != "eps":
            raise UsageError(f"--u: expected 'eps=' after ';', got {tail!r}")
        raw = value.replace(",", "").strip()
        if any(c not in "01" for c in raw):
            raise UsageError(f"--u: eps bits must be 0 or 1, got {value!r}")
        bits = [int(c) for c in raw]
    try:
        return UCylinder(tuple(points), tuple(bits))
    except (ValueError, SemigenericError) as exc:
        raise UsageError(f"--u: {exc}") from None


def parse_v(text: str) -> VCylinder:
    """``"1,2,4;6,7"``: increasing tuples, one per column, separated by ';'."""
    tuples = [tuple(_parse_points(part, "--v")) for part in text.split(";") if part.strip()]
    try:
        return VCylinder(tuple(tuples))
    except SemigenericError as exc:
        raise UsageError(f"--v: {exc}") from None


# -- commands ---------------------------------------------------------------


def cmd_validate(cfg: RunConfig, args) -> int:
    g, violation = _load_graph(cfg)
    if violation is not None:
        return _invalid(violation, cfg)
    if args.dot:
        Path(args.dot).write_text(to_dot(g))
    _emit({"valid": True, "columns": [list(c) for c in g.columns]}, cfg.output)
    return 0


def cmd_generate(cfg: RunConfig, args) -> int:
    if args.steps < 0:
        raise UsageError("--steps must be non-negative")
    if args.demand_size < 0:
        raise UsageError("--demand-size must be non-negative")
    result = build_generic(args.steps, args.demand_size, cfg.seed, segment_size=args.segment_size)
    if len(result.graph) > cfg.max_vertices:
        log.warning("generated structure exceeds --max-vertices (%d)", len(result.graph))
    report = result.report()
    if cfg.output:
        _emit(result.graph.to_json(), cfg.output)
        _emit(report, None)
    else:
        _emit({"graph": result.graph.to_json(), **report}, None)
    return 0


def cmd_expand(cfg: RunConfig, args) -> int:
    g, violation = _load_graph(cfg)
    if violation is not None:
        return _invalid(violation, cfg)
    if args.count:
        _emit({"count": expansion_count_formula(g)}, cfg.output)
        return 0
    if args.check:
        e = StarExpansion.from_json(g, _load_json(args.check, "--check"))
        verdict = check_star(g, e.listing, e.R)
        payload = {"valid": verdict.ok}
        if not verdict.ok:
            payload["condition"] = verdict.condition
            payload["witness"] = list(verdict.witness or ())
        _emit(payload, cfg.output)
        return 0 if verdict.ok else 1
    exps = enumerate_expansions(g, args.max_expansions, jobs=cfg.jobs)
    _emit({"count": len(exps), "expansions": [e.to_json() for e in exps]}, cfg.output)
    return 0


def cmd_measure(cfg: RunConfig, args) -> int:
    g, violation = _load_graph(cfg)
    if violation is not None:
        return _invalid(violation, cfg)
    u = parse_u(args.u) if args.u else None
    v = parse_v(args.v) if args.v else None
    for part in (u, v):
        if part is not None:
            try:
                part.check_columns(g)
            except SemigenericError as exc:
                raise UsageError(f"--{'u' if part is u else 'v'}: {exc}") from None
    if args.mc is not None:
        if cfg.seed is None:
            raise UsageError("--seed is required with --mc")
        if args.mc <= 0:
            raise UsageError("--mc must be positive")
        _emit(estimate(g, Cylinder(u, v), args.mc, cfg.seed, jobs=cfg.jobs), cfg.output)
        return 0
    value = brute_measure(g, u, v, max_expansions=args.max_expansions)
    _emit({"exact": _fraction(value), "mu0": _fraction(mu0_cyl(u, v))}, cfg.output)
    return 0


def cmd_selfcheck(cfg: RunConfig, args) -> int:
    outcomes = run_selfcheck(
        max_vertices=cfg.max_vertices,
        max_columns=cfg.max_columns,
        seed=cfg.seed if cfg.seed is not None else 0,
        draws=args.draws,
        jobs=cfg.jobs,
    )
    for name, o in outcomes.items():
        log.info("%s: %s (%d cases, %.1fs)", name, "pass" if o.passed else "FAIL", o.cases, o.seconds)
    payload = {
        "passed": all(o.passed for o in outcomes.values()),
        "identities": {name: o.to_json() for name, o in outcomes.items()},
    }
    _emit(payload, cfg.output)
    return 0 if payload["passed"] else 1


COMMANDS = {
    "validate": cmd_validate,
    "generate": cmd_generate,
    "expand": cmd_expand,
    "measure": cmd_measure,
    "selfcheck": cmd_selfcheck,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write JSON here instead of stdout")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--max-vertices", type=int)
    common.add_argument("--max-columns", type=int)

    parser = argparse.ArgumentParser(prog="semigen", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check membership in S")
    p.add_argument("input")
    p.add_argument("--dot", help="also write a DOT drawing to this path")

    p = sub.add_parser("generate", parents=[common], help="grow a saturated finite approximation")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--demand-size", type=int, default=2)
    p.add_argument("--segment-size", type=int, default=10)

    p = sub.add_parser("expand", parents=[common], help="expansions in S*")
    p.add_argument("input")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--enumerate", action="store_true")
    mode.add_argument("--count", action="store_true")
    mode.add_argument("--check", metavar="EXPANSION_JSON")
    p.add_argument("--max-expansions", type=int, default=DEFAULT_MAX_EXPANSIONS)

    p = sub.add_parser("measure", parents=[common], help="measure of a cylinder")
    p.add_argument("input")
    p.add_argument("--u", help='base points and bits, e.g. "0,3;eps=1"')
    p.add_argument("--v", help='increasing tuples per column, e.g. "0,1,2;4,5"')
    how = p.add_mutually_exclusive_group()
    how.add_argument("--exact", action="store_true", help="exact count (default)")
    how.add_argument("--mc", type=int, metavar="N", help="Monte Carlo with N draws")
    p.add_argument("--max-expansions", type=int, default=DEFAULT_MAX_EXPANSIONS)

    p = sub.add_parser("selfcheck", parents=[common], help="run the identity sweeps")
    p.add_argument("--draws", type=int, default=20_000)
    return parser


def _config(args) -> RunConfig:
    defaults = {"selfcheck": (6, 3)}
    max_v, max_c = defaults.get(args.command, (200, 200))
    return RunConfig(
        command=args.command,
        input=getattr(args, "input", None),
        output=args.out,
        seed=args.seed,
        max_vertices=args.max_vertices if args.max_vertices is not None else max_v,
        max_columns=args.max_columns if args.max_columns is not None else max_c,
        jobs=args.jobs,
    )


def _configure_logging(level_name: str) -> None:
    log.setLevel(getattr(logging, level_name.upper(), logging.WARNING))
    # rebind on every run so the handler follows the current sys.stderr
    for h in [h for h in log.handlers if getattr(h, "_semigen", False)]:
        log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    handler._semigen = True
    log.addHandler(handler)
    log.propagate = False


def run(argv: list[str] | None = None) -> int:
    _configure_logging(os.environ.get("SEMIGEN_LOG", "WARNING"))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        return COMMANDS[cfg.command](cfg, args)
    except UsageError as exc:
        parser.error(str(exc))
    except ScaleExceeded as exc:
        parser.error(f"--max-expansions: {exc}")
    except SemigenericError as exc:
        # Malformed input: self loops, duplicate or opposite edges, unknown ids.
        _emit({"valid": False, "error": f"{type(exc).__name__}: {exc}"}, getattr(args, "out", None))
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
