"""Command-line interface.

Subcommands: parse, print, check, prove, translate, falsify, fuzz, serve.
The default search budget can be set through the FLORET_BUDGET environment
variable, e.g. ``FLORET_BUDGET=steps=40000,depth=10,inst=4,timeout_ms=20000``;
every randomized command takes ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path as FsPath

from .derivations import check_proof_text, digest, format_proof
from .formulas import decode, encode, formula_text, parse_formula
from .fuzz import fuzz_soundness
from .parse import parse_bouquet
from .prover import Outcome, SearchBudget, prove
from .semantics import find_countermodel
from .service import serve_http, serve_stdio
from .session import SessionManager
from .syntax import (
    FloretError, Signature, bouquet_depth, bouquet_text, free_vars,
)


def _load_sig(path: str | None) -> Signature:
    if path is None:
        raise FloretError("a signature file is required (--sig FILE)")
    return Signature.from_text(FsPath(path).read_text())


def _read_text(arg: str | None, path: str | None) -> str:
    if arg is not None:
        return arg
    if path is not None:
        return FsPath(path).read_text()
    return sys.stdin.read()


def _budget(args) -> SearchBudget:
    spec = {}
    env = os.environ.get("FLORET_BUDGET", "")
    for item in env.split(","):
        if "=" in item:
            k, v = item.split("=", 1)
            spec[k.strip()] = int(v)
    mapping = dict(
        max_steps=spec.get("steps", 20000),
        max_depth=spec.get("depth", 8),
        max_instantiations_per_binder=spec.get("inst", 4),
        timeout_ms=spec.get("timeout_ms", 10000),
    )
    if args.steps is not None:
        mapping["max_steps"] = args.steps
    if args.depth is not None:
        mapping["max_depth"] = args.depth
    if args.inst is not None:
        mapping["max_instantiations_per_binder"] = args.inst
    if args.timeout_ms is not None:
        mapping["timeout_ms"] = args.timeout_ms
    return SearchBudget(**mapping)


def _goal_from_args(args, sig: Signature):
    text = _read_text(args.goal, getattr(args, "file", None))
    if getattr(args, "formula", False):
        return encode(parse_formula(text, sig))
    return parse_bouquet(text, sig)


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="floret")
    ap.add_argument("--sig", help="signature file: one 'name arity' per line")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a bouquet and report its shape")
    p.add_argument("goal", nargs="?")
    p.add_argument("--file")

    p = sub.add_parser("print", help="canonical text of a bouquet")
    p.add_argument("goal", nargs="?")
    p.add_argument("--file")

    p = sub.add_parser("check", help="replay and verify a proof file")
    p.add_argument("proof")
    p.add_argument("--trust-nondup", action="store_true",
                   help="accept non-duplicating steps even where the implicit "
                        "erasure is polarity-illegal (off by default)")

    p = sub.add_parser("prove", help="search for a proof; falls back to refutation")
    p.add_argument("goal", nargs="?")
    p.add_argument("--file")
    p.add_argument("--formula", action="store_true", help="goal is a formula, not a bouquet")
    p.add_argument("--out", help="write the proof file here")
    p.add_argument("--steps", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--inst", type=int)
    p.add_argument("--timeout-ms", dest="timeout_ms", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--single-thread", action="store_true",
                   help="already the only mode; accepted for determinism scripts")

    p = sub.add_parser("translate", help="formula <-> flower translation")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--to-flowers", metavar="FORMULA")
    g.add_argument("--to-formula", metavar="BOUQUET")

    p = sub.add_parser("falsify", help="bounded countermodel search")
    p.add_argument("goal", nargs="?")
    p.add_argument("--file")
    p.add_argument("--formula", action="store_true")
    p.add_argument("--worlds", type=int, default=2)
    p.add_argument("--domain", type=int, default=1)
    p.add_argument("--json", dest="json_out", help="write the machine form here")

    p = sub.add_parser("fuzz", help="randomized rule-soundness oracle")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--natural", type=int, default=200)
    p.add_argument("--cultural", type=int, default=100)
    p.add_argument("--models", type=int, default=5)
    p.add_argument("--worlds", type=int, default=3)
    p.add_argument("--domain", type=int, default=2)
    p.add_argument("--mutate", choices=["skip_pollination"],
                   help="deliberately corrupt an erasure to demonstrate sensitivity")
    p.add_argument("--report", default="fuzz-report",
                   help="basename for the TSV table and PNG chart")

    p = sub.add_parser("serve", help="session protocol over stdio or HTTP")
    p.add_argument("--http", action="store_true")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--snapshot-dir", help="mirror session action logs here")

    args = ap.parse_args(argv)
    try:
        return _dispatch(args)
    except (FloretError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    cmd = args.command

    if cmd == "parse":
        sig = _load_sig(args.sig)
        b = parse_bouquet(_read_text(args.goal, args.file), sig)
        print(f"ok: {len(b)} flowers, depth {bouquet_depth(b)}, digest {digest(b)}")
        fv = sorted(v.display for v in free_vars(b))
        if fv:
            print("free: " + ", ".join(fv))
        return 0

    if cmd == "print":
        sig = _load_sig(args.sig)
        print(bouquet_text(parse_bouquet(_read_text(args.goal, args.file), sig)))
        return 0

    if cmd == "check":
        sig = _load_sig(args.sig)
        res = check_proof_text(FsPath(args.proof).read_text(), sig,
                               trusted_nondup=args.trust_nondup)
        if res.ok:
            print("ok: proof checks and ends at the empty garden")
            return 0
        if res.step_index is None:
            print(f"parse error: {res.reason}", file=sys.stderr)
            return 2
        print(f"invalid at step {res.step_index}: {res.reason}", file=sys.stderr)
        return 1

    if cmd == "prove":
        sig = _load_sig(args.sig)
        goal = _goal_from_args(args, sig)
        out = prove(goal, _budget(args))
        if out.outcome is Outcome.PROVED:
            text = format_proof(out.derivation)
            if args.out:
                FsPath(args.out).write_text(text)
                print(f"proved ({len(out.derivation.steps)} steps) -> {args.out}")
            else:
                sys.stdout.write(text)
            return 0
        if out.outcome is Outcome.REFUTED:
            print("refuted:")
            print(out.countermodel.describe())
            return 3
        print("unknown: budget exhausted without a proof or a countermodel")
        return 4

    if cmd == "translate":
        sig = _load_sig(args.sig)
        if args.to_flowers is not None:
            print(bouquet_text(encode(parse_formula(args.to_flowers, sig))))
        else:
            print(formula_text(decode(parse_bouquet(args.to_formula, sig))))
        return 0

    if cmd == "falsify":
        sig = _load_sig(args.sig)
        goal = _goal_from_args(args, sig)
        cm = find_countermodel(goal, args.worlds, args.domain)
        if cm is None:
            print(f"no countermodel within {args.worlds} worlds / {args.domain} elements")
            return 1
        print(cm.describe())
        if args.json_out:
            FsPath(args.json_out).write_text(json.dumps(cm.to_json(), indent=2) + "\n")
        return 0

    if cmd == "fuzz":
        report = fuzz_soundness(
            args.seed, n_natural=args.natural, n_cultural=args.cultural,
            n_models=args.models, bounds=(args.worlds, args.domain),
            mutate=args.mutate)
        tsv = FsPath(args.report + ".tsv")
        tsv.write_text(report.to_tsv())
        png = FsPath(args.report + ".png")
        try:
            report.save_figure(str(png))
            figure_note = f", chart {png}"
        except Exception as e:  # matplotlib absent or headless trouble
            figure_note = f" (chart skipped: {e})"
        total = report.natural_steps + report.cultural_steps
        print(f"{total} steps x {report.models_checked} model checks, "
              f"{len(report.violations)} violations -> {tsv}{figure_note}")
        for v in report.violations[:5]:
            print(f"  violation[{v.kind}] {v.rule} on {v.subject!r}")
        return 0 if report.ok else 1

    if cmd == "serve":
        sig = _load_sig(args.sig)
        if args.http:
            serve_http(sig, args.host, args.port, args.snapshot_dir)
        else:
            serve_stdio(SessionManager(sig, args.snapshot_dir))
        return 0

    raise AssertionError(cmd)


if __name__ == "__main__":
    sys.exit(main())
