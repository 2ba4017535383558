"""Command-line surface for the formula-to-track pipeline.

Exit status contract: 0 for a positive result (satisfiable, solved,
complete, agree), 1 for a negative result (unsatisfiable, no certificate,
incomplete, disagreement), 2 for errors (bad files, bad arguments, exceeded
limits). Long flags can also be set through environment variables named
SAT2TRACK_<FLAG> (flag upper-cased, hyphens as underscores); explicit flags
win over the environment.
"""
from __future__ import annotations

import argparse
import os
import sys

from sat2track import corpus, engine, layout, reduction, render
from sat2track.cnf import (
    Assignment,
    DimacsError,
    OracleLimitError,
    normalize_to_3cnf,
    parse_dimacs,
    sat_oracle,
)
from sat2track.track import (
    RespawnPolicy,
    Track,
    TrackFormatError,
    TrackInvariantError,
    certificate_from_text,
    certificate_to_text,
    from_text,
    to_text,
)

ENV_PREFIX = "SAT2TRACK_"


def _env(flag: str, default: str | None) -> str | None:
    return os.environ.get(ENV_PREFIX + flag.upper().replace("-", "_"), default)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def _policy(name: str) -> RespawnPolicy:
    try:
        return RespawnPolicy(name.replace("-", "_"))
    except ValueError:
        raise ValueError(f"unknown respawn policy {name!r}") from None


def _load_track(path: str) -> Track:
    return from_text(_read(path))


def _parse_assignment(source: str, num_variables: int) -> Assignment:
    """Assignment from literal text, either inline ('1 -2 3 0') or a path."""
    fields = source.split()
    inline = fields and all(
        f == "v" or f.lstrip("-").isdigit() for f in fields
    )
    text = source if inline else _read(source)
    lits = []
    for field in text.split():
        if field == "v":
            continue
        lit = int(field)
        if lit == 0:
            break
        lits.append(lit)
    return Assignment.from_ints(num_variables, lits)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sat2track",
        description="Compile 3-CNF formulas into completability-equivalent "
        "tracks; solve, verify, and inspect them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def output_flag(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "-o", "--output", default=_env("output", None),
            help="output path ('-' or omitted: stdout)",
        )

    def respawn_flag(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--respawn", choices=["disabled", "fixed", "any-touch"],
            default=_env("respawn", "fixed"),
            help="respawn policy for driving (default: fixed)",
        )

    p = sub.add_parser("compile", help="compile a DIMACS CNF file into a track")
    p.add_argument("cnf", help="DIMACS CNF path ('-': stdin)")
    output_flag(p)
    p.add_argument(
        "--layout", choices=["comb", "none"], default=_env("layout", "none"),
        help="also lay the track out on the block grid (default: none)",
    )

    p = sub.add_parser("solve", help="search a track for a completing certificate")
    p.add_argument("track")
    output_flag(p)
    respawn_flag(p)
    p.add_argument(
        "--max-checkpoints", type=int,
        default=int(_env("max-checkpoints", str(engine.DEFAULT_MAX_CHECKPOINTS))),
        help="refuse tracks with more checkpoints than this",
    )
    p.add_argument(
        "--max-states", type=int,
        default=int(_env("max-states", str(engine.DEFAULT_MAX_STATES))),
        help="abort after exploring this many states",
    )

    p = sub.add_parser("verify", help="replay a certificate and report completion")
    p.add_argument("track")
    p.add_argument("certificate")
    respawn_flag(p)

    p = sub.add_parser("extract", help="read a satisfying assignment off a certificate")
    p.add_argument("track")
    p.add_argument("certificate")
    output_flag(p)

    p = sub.add_parser(
        "drive", help="turn an assignment into a certificate and replay it"
    )
    p.add_argument("track")
    p.add_argument("assignment", help="literals, e.g. '1 -2 3 0' ('-': stdin)")
    output_flag(p)
    respawn_flag(p)

    p = sub.add_parser("render", help="render a track as SVG")
    p.add_argument("track")
    output_flag(p)
    p.add_argument(
        "--mode", choices=["auto", "abstract", "blocks"],
        default=_env("mode", "auto"),
        help="abstract pad graph or block grid (auto: blocks when present)",
    )
    layer_env = _env("layer", None)
    p.add_argument(
        "--layer", type=int, default=None if layer_env is None else int(layer_env),
        help="single altitude layer to render (blocks mode)",
    )

    p = sub.add_parser("stats", help="print track size counters")
    p.add_argument("track")

    p = sub.add_parser("oracle", help="decide satisfiability by enumeration")
    p.add_argument("cnf")
    p.add_argument(
        "--max-vars", type=int, default=int(_env("max-vars", "24")),
        help="refuse formulas with more variables than this",
    )

    p = sub.add_parser(
        "equivalence",
        help="check oracle-vs-track agreement over a seeded random corpus",
    )
    p.add_argument("--seed", type=int, default=int(_env("seed", str(corpus.RANDOM_SEED))))
    p.add_argument("--count", type=int, default=int(_env("count", str(corpus.RANDOM_COUNT))))
    p.add_argument(
        "--max-vars", type=int, default=int(_env("max-vars", str(corpus.RANDOM_MAX_VARIABLES)))
    )
    respawn_flag(p)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _dispatch(args)
    except (
        DimacsError,
        TrackFormatError,
        TrackInvariantError,
        reduction.ReductionError,
        layout.LayoutError,
        render.RenderError,
        OracleLimitError,
        engine.SolveLimitError,
        OSError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "compile":
        return _cmd_compile(args)
    if args.command == "solve":
        return _cmd_solve(args)
    if args.command == "verify":
        return _cmd_verify(args)
    if args.command == "extract":
        return _cmd_extract(args)
    if args.command == "drive":
        return _cmd_drive(args)
    if args.command == "render":
        return _cmd_render(args)
    if args.command == "stats":
        return _cmd_stats(args)
    if args.command == "oracle":
        return _cmd_oracle(args)
    if args.command == "equivalence":
        return _cmd_equivalence(args)
    raise AssertionError(f"unhandled command {args.command}")


def _cmd_compile(args: argparse.Namespace) -> int:
    raw = parse_dimacs(_read(args.cnf))
    normalized = normalize_to_3cnf(raw)
    fresh = normalized.formula.num_variables - normalized.source_variables
    if fresh or len(normalized.formula.clauses) != len(raw.clauses):
        print(
            f"note: normalized to exactly-3 CNF with {fresh} fresh variable(s), "
            f"{len(normalized.formula.clauses)} clause(s)",
            file=sys.stderr,
        )
    track = reduction.compile_formula(normalized.formula)
    if args.layout == "comb":
        track = layout.layout_comb(track)
    _write(args.output, to_text(track))
    return 0


def _cmd_solve(args: argparse.Namespace) -> int:
    track = _load_track(args.track)
    certificate = engine.solve(
        track,
        policy=_policy(args.respawn),
        max_checkpoints=args.max_checkpoints,
        max_states=args.max_states,
    )
    if certificate is None:
        print("no certificate: track is not completable", file=sys.stderr)
        return 1
    _write(args.output, certificate_to_text(certificate))
    return 0


def _report_lines(report: engine.CompletionReport) -> str:
    lines = [
        f"valid {int(report.valid)}",
        f"complete {int(report.complete)}",
        f"actions {report.actions_consumed}",
        f"checkpoints {len(report.collected_at_end)}",
    ]
    if report.first_illegal_index is not None:
        lines.append(f"first_illegal {report.first_illegal_index}")
    return "\n".join(lines) + "\n"


def _cmd_verify(args: argparse.Namespace) -> int:
    track = _load_track(args.track)
    certificate = certificate_from_text(_read(args.certificate))
    report = engine.verify(track, certificate, policy=_policy(args.respawn))
    sys.stdout.write(_report_lines(report))
    return 0 if report.complete else 1


def _cmd_extract(args: argparse.Namespace) -> int:
    track = _load_track(args.track)
    certificate = certificate_from_text(_read(args.certificate))
    try:
        assignment = reduction.extract_assignment(track, certificate)
    except reduction.CertificateError as exc:
        print(f"not extractable: {exc}", file=sys.stderr)
        return 1
    _write(args.output, " ".join(str(l) for l in assignment.to_ints()) + " 0\n")
    return 0


def _cmd_drive(args: argparse.Namespace) -> int:
    track = _load_track(args.track)
    meta = reduction.require_meta(track)
    assignment = _parse_assignment(args.assignment, meta.num_variables)
    certificate = reduction.assignment_to_certificate(track, assignment)
    report = engine.verify(track, certificate, policy=_policy(args.respawn))
    _write(args.output, certificate_to_text(certificate))
    print(_report_lines(report), end="", file=sys.stderr)
    return 0 if report.complete else 1


def _cmd_render(args: argparse.Namespace) -> int:
    track = _load_track(args.track)
    mode = args.mode
    if mode == "auto":
        mode = "blocks" if track.blocks is not None else "abstract"
    if mode == "abstract":
        _write(args.output, render.render_svg(track, "abstract"))
        return 0
    if track.blocks is None:
        raise render.RenderError("track has no blocks; run the layout first")
    layers = sorted({block.z for block in track.blocks})
    if args.layer is not None:
        if args.layer not in layers:
            raise render.RenderError(f"no blocks on layer {args.layer}")
        _write(args.output, render.render_svg(track, "blocks", args.layer))
        return 0
    if args.output is None or args.output == "-":
        raise render.RenderError("multi-layer rendering needs an output path")
    base, dot, extension = args.output.rpartition(".")
    if not dot:
        base, extension = args.output, "svg"
    for z in layers:
        _write(f"{base}.z{z}.{extension}", render.render_svg(track, "blocks", z))
        print(f"{base}.z{z}.{extension}")
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    track = _load_track(args.track)
    lines = [
        f"pads {len(track.pads)}",
        f"links {len(track.links)}",
        f"checkpoints {track.checkpoint_count}",
    ]
    if track.meta is not None:
        meta = reduction.require_meta(track)
        lines.append(f"variables {meta.num_variables}")
        lines.append(f"clauses {meta.num_clauses}")
    if track.blocks is not None:
        lines.append(f"blocks {len(track.blocks)}")
        lines.append(f"crossings {layout.crossing_count(track)}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    raw = parse_dimacs(_read(args.cnf))
    normalized = normalize_to_3cnf(raw)
    witness = sat_oracle(normalized.formula, limit=args.max_vars)
    if witness is None:
        print("unsat")
        return 1
    projected = normalized.project(witness)
    print("sat " + " ".join(str(l) for l in projected.to_ints()) + " 0")
    return 0


def _cmd_equivalence(args: argparse.Namespace) -> int:
    import random

    rng = random.Random(args.seed)
    formulas = corpus.regression_formulas() + [
        corpus.random_formula(rng, max_variables=args.max_vars)
        for _ in range(args.count)
    ]
    agree = skipped = 0
    counterexample = None
    for formula in formulas:
        try:
            report = engine.equivalence_check(formula, policy=_policy(args.respawn))
        except (OracleLimitError, engine.SolveLimitError):
            skipped += 1
            continue
        if report.ok:
            agree += 1
        elif counterexample is None:
            counterexample = (formula, report)
    checked = len(formulas) - skipped
    print(f"agree {agree}/{checked}, skipped {skipped}")
    if counterexample is not None:
        formula, report = counterexample
        print("counterexample:")
        from sat2track.cnf import print_dimacs

        sys.stdout.write(print_dimacs(formula))
        print(
            f"satisfiable {report.satisfiable} completable {report.completable}"
        )
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
