"""Command line: analyze, gen, fuzz, oracle."""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import io
from .errors import InstanceFormatError, RetryCapExceeded
from .generate import FAMILIES, FamilySpec, gen
from .structure import EXIT_CODES, analyze

SEED_ENV = "FLATFORM_SEED"


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1 so that 2 keeps meaning "violation candidate"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def analysis_document(a, path=None) -> dict:
    rep = a.report
    doc = {
        "instance": None if path is None else str(path),
        "verdict": a.verdict,
        "exit_code": a.exit_code,
        "report": rep.as_dict() if rep is not None else None,
        "checks": [{"name": k, "pass": bool(v)} for k, v in a.checks.items()],
        "invariants": io.plain(a.invariants),
        "seed": a.seed,
        "timing_seconds": round(a.timing, 6),
        "oracle_agreement": a.oracle_agreement,
        "messages": a.messages,
    }
    return doc


def _emit(doc: dict, out) -> None:
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _invalid(path, exc) -> dict:
    return {
        "instance": str(path),
        "verdict": "input_invalid",
        "exit_code": EXIT_CODES["input_invalid"],
        "error": {"where": getattr(exc, "where", None), "message": str(exc)},
    }


def cmd_analyze(args) -> int:
    try:
        kp, _ = io.load(args.path)
    except (InstanceFormatError, ValueError) as exc:
        _emit(_invalid(args.path, exc), args.out)
        print(f"input_invalid: {exc}", file=sys.stderr)
        return EXIT_CODES["input_invalid"]
    a = analyze(kp, seed=args.seed, oracle=args.oracle)
    _emit(analysis_document(a, args.path), args.out)
    return a.exit_code


def cmd_gen(args) -> int:
    try:
        spec = FamilySpec(args.family, args.n, args.p, args.seed, args.bound)
        g = gen(spec)
    except RetryCapExceeded as exc:
        print(f"retry_cap_exceeded: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = io.dumps(g.kp, g.meta)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def trial_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint32)[0])


def run_trial(task) -> dict:
    index, family, n, p, seed, bound, use_oracle = task
    rec = {"index": index, "family": family, "n": n, "p": p, "seed": seed}
    try:
        g = gen(FamilySpec(family, n, p, seed, bound))
    except RetryCapExceeded as exc:
        rec["status"] = "retry_cap_exceeded"
        rec["message"] = str(exc)
        return rec
    except ValueError as exc:
        rec["status"] = "skipped"
        rec["message"] = str(exc)
        return rec
    a = analyze(g.kp, seed=seed, oracle=use_oracle and g.kp.dim <= 12 and p <= 6)
    rec.update(
        status="analyzed",
        tries=g.meta.get("tries"),
        verdict=a.verdict,
        oracle_agreement=a.oracle_agreement,
        q_dim=a.report.q_dim if a.report else None,
        messages=[m for m in a.messages if not m.startswith("oracle: note")],
    )
    if a.verdict == "violation_candidate":
        rec["instance"] = io.dumps(g.kp, g.meta)
    return rec


def fuzz(trials: int, n: int, p: int, seed: int, families, bound: int = 3, jobs: int = 1, oracle: bool = True) -> dict:
    tasks = [
        (i, families[i % len(families)], n, p, trial_seed(seed, i), bound, oracle) for i in range(trials)
    ]
    if jobs > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            records = list(ex.map(run_trial, tasks))
    else:
        records = [run_trial(t) for t in tasks]
    counts = Counter(r["verdict"] for r in records if r["status"] == "analyzed")
    status = Counter(r["status"] for r in records)
    tries = Counter()
    runs = Counter()
    for r in records:
        if r["status"] == "analyzed":
            tries[r["family"]] += r["tries"]
            runs[r["family"]] += 1
    findings = sorted(
        (r for r in records if r.get("verdict") == "violation_candidate" or r["status"] == "retry_cap_exceeded"),
        key=lambda r: (r["seed"], r["index"]),
    )
    return {
        "trials": trials,
        "n": n,
        "p": p,
        "seed": seed,
        "families": list(families),
        "verdicts": {v: counts.get(v, 0) for v in EXIT_CODES if v != "input_invalid"},
        "status": dict(sorted(status.items())),
        "acceptance_rate": {f: runs[f] / tries[f] for f in sorted(runs)},
        "oracle_disagreements": sum(1 for r in records if r.get("oracle_agreement") is False),
        "findings": findings,
    }


def cmd_fuzz(args) -> int:
    fams = [f.strip() for f in args.families.split(",") if f.strip()]
    unknown = [f for f in fams if f not in FAMILIES]
    if unknown or not fams:
        print(f"error: unknown families {unknown}; choose from {', '.join(FAMILIES)}", file=sys.stderr)
        return 1
    summary = fuzz(args.trials, args.n, args.p, args.seed, fams, args.bound, args.jobs, not args.no_oracle)
    _emit(summary, args.out)
    return 2 if summary["verdicts"]["violation_candidate"] else 0


def cmd_oracle(args) -> int:
    from .oracle import OracleSizeError, agrees, oracle

    try:
        kp, _ = io.load(args.path)
    except (InstanceFormatError, ValueError) as exc:
        _emit(_invalid(args.path, exc), args.out)
        print(f"input_invalid: {exc}", file=sys.stderr)
        return 1
    try:
        table = oracle(kp)
        ok, msgs = agrees(kp, args.seed)
    except OracleSizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit({"instance": str(args.path), "table": table.summary(), "agreement": ok, "messages": msgs}, args.out)
    return 0 if ok else 2


def build_parser() -> argparse.ArgumentParser:
    seed = _default_seed()
    ap = _Parser(prog="flatform", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="analyze an instance file")
    a.add_argument("path")
    a.add_argument("--oracle", action="store_true", help="cross-check with the brute-force oracle")
    a.add_argument("--seed", type=int, default=seed)
    a.add_argument("--out", help="write the report here instead of stdout")
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("gen", help="generate an instance file")
    g.add_argument("--family", required=True, choices=FAMILIES)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--seed", type=int, default=seed)
    g.add_argument("--bound", type=int, default=3, help="coefficient bound")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("fuzz", help="generate-analyze-oracle campaign")
    f.add_argument("--trials", type=int, required=True)
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--p", type=int, required=True)
    f.add_argument("--seed", type=int, default=seed)
    f.add_argument("--families", default=",".join(FAMILIES))
    f.add_argument("--bound", type=int, default=3)
    f.add_argument("--jobs", type=int, default=1)
    f.add_argument("--no-oracle", action="store_true")
    f.add_argument("--out")
    f.set_defaults(func=cmd_fuzz)

    o = sub.add_parser("oracle", help="print the brute-force invariant table")
    o.add_argument("path")
    o.add_argument("--seed", type=int, default=seed)
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
