"""Command-line front end.

Every command reads explicitly named files, prints one report to stdout,
and exits 0 on success, 1 on a validation error, 2 on a numerical error.
Reports embed the fully resolved configuration so a run can be reproduced
from the report alone; numeric output uses 9 significant digits and a
fixed field order, making reports byte-stable across runs.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .conditioning import DEFAULT_DROP, SCHEMES, emit_pairs, write_pairs
from .errors import NumericalError, ValidationError
from .metrics import MetricReport, build_ground_stats, clap_score, fad, moments, tc
from .refsynth import GRAM_MATCH_RTOL, load_prompt, METHODS, t2i_score
from .selftest import collect_results, run_selftest
from .store import (
    DatasetIndex,
    load_population,
    load_stats,
    save_population,
    save_stats,
    synth_population,
    SynthSpec,
    SYNTH_PRESETS,
)


def _nine(x: float) -> float:
    # shortest repr of the 9-significant-digit rounding; round-trips exactly
    return float(f"{float(x):.9g}")


def _jsonable(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, (float, np.floating)):
        return _nine(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    return value


def _scalar_text(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return json.dumps(_jsonable(value), sort_keys=True, separators=(",", ":"))


def _print_report(report: MetricReport, as_json: bool, extra: dict | None = None) -> None:
    doc = report.to_dict()
    if extra:
        doc.update(_jsonable(extra))
    if as_json:
        print(json.dumps(_jsonable(doc), indent=2))
        return
    print(f"metric  {doc['metric']}")
    print(f"value   {_scalar_text(doc['value'])}")
    if doc.get("per_instrument"):
        print("per instrument:")
        width = max(len(k) for k in doc["per_instrument"])
        for key in sorted(doc["per_instrument"]):
            print(f"  {key:<{width}}  {_scalar_text(doc['per_instrument'][key])}")
    print("config:")
    width = max(len(k) for k in doc["config"])
    for key in sorted(doc["config"]):
        print(f"  {key:<{width}}  {_scalar_text(doc['config'][key])}")


def _warn_coverage(report: MetricReport) -> None:
    for iid, frac in sorted(report.config.get("coverage_warnings", {}).items()):
        print(
            f"warning: {iid}: {_scalar_text(frac)} of restricted ground entries "
            "are unobserved", file=sys.stderr,
        )


def cmd_fad(args) -> int:
    ref = load_population(args.ref)
    test = load_population(args.test)
    report = fad(ref, test, paper_literal=args.paper_literal, ddof=args.ddof)
    report.config.update({"ref": args.ref, "test": args.test})
    extra = None
    if args.with_matrices:
        m1 = moments(ref, ddof=args.ddof)
        m2 = moments(test, ddof=args.ddof)
        extra = {
            "matrices": {
                "ref_mean": m1.mean, "ref_covariance": m1.covariance,
                "test_mean": m2.mean, "test_covariance": m2.covariance,
            }
        }
        if not args.json:
            print("note: matrices are emitted in --json form only", file=sys.stderr)
            extra = None
    _print_report(report, args.json, extra)
    return 0


def cmd_tc(args) -> int:
    test = load_population(args.test)
    if args.star:
        if not args.stats:
            raise ValidationError("--star requires --stats with ground statistics")
        cosine, _ = load_stats(args.stats)
        report = tc(cosine, test, star=True)
        report.config.update({"star": True, "stats": args.stats, "test": args.test})
    else:
        if not args.ref:
            raise ValidationError("tc without --star requires --ref")
        report = tc(load_population(args.ref), test)
        report.config.update({"star": False, "ref": args.ref, "test": args.test})
    _warn_coverage(report)
    _print_report(report, args.json)
    return 0


def cmd_clapscore(args) -> int:
    report = clap_score(load_population(args.ref), load_population(args.test), args.mode)
    report.config.update({"mode": args.mode, "ref": args.ref, "test": args.test})
    _print_report(report, args.json)
    return 0


def cmd_t2i(args) -> int:
    cosine, mean = load_stats(args.stats)
    report = t2i_score(
        load_prompt(args.prompt),
        load_population(args.generated),
        mean,
        cosine,
        method=args.method,
        paper_literal=args.paper_literal,
        gram_rtol=args.gram_tol,
    )
    report.config.update({
        "prompt": args.prompt, "generated": args.generated, "stats": args.stats,
        "gram_tol": args.gram_tol,
    })
    _print_report(report, args.json)
    return 0


def cmd_build_stats(args) -> int:
    ref = load_population(args.ref)
    cosine, mean = build_ground_stats(ref)
    save_stats(cosine, mean, args.out)
    observed = int(np.count_nonzero(np.diag(cosine.count)))
    report = MetricReport(
        "build_stats",
        float(observed),
        None,
        {
            "ref": args.ref, "out": args.out, "dz": ref.dz,
            "instruments": len(ref.instruments), "n_samples": ref.n_samples,
            "observed_cells": observed,
            "mean_cells": int(np.count_nonzero(mean.count)),
        },
    )
    _print_report(report, args.json)
    return 0


def cmd_pairgen(args) -> int:
    index = DatasetIndex.from_manifest(args.manifest)
    examples = emit_pairs(index, args.scheme, args.seed, args.drop)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            count = write_pairs(examples, fh, args.scheme, args.seed)
        sink = sys.stdout
    else:
        count = write_pairs(examples, sys.stdout, args.scheme, args.seed)
        sink = sys.stderr
    report = MetricReport(
        "pairgen",
        float(count),
        None,
        {
            "manifest": args.manifest, "scheme": args.scheme, "seed": args.seed,
            "drop": args.drop, "out": args.out or "-", "pairs": count,
        },
    )
    doc = report.to_dict()
    if args.json:
        print(json.dumps(_jsonable(doc), indent=2), file=sink)
    else:
        print(f"pairs   {count}", file=sink)
        width = max(len(k) for k in doc["config"])
        for key in sorted(doc["config"]):
            print(f"  {key:<{width}}  {_scalar_text(doc['config'][key])}", file=sink)
    return 0


def cmd_synth(args) -> int:
    spec = SynthSpec(args.preset, args.dz, args.instruments, args.cells, args.noise)
    es = synth_population(spec, args.seed)
    save_population(es, args.out)
    report = MetricReport(
        "synth",
        float(es.n_samples),
        None,
        {
            "preset": args.preset, "dz": args.dz, "instruments": args.instruments,
            "cells": args.cells if args.cells is not None else "full",
            "noise": args.noise, "seed": args.seed, "out": args.out,
            "n_samples": es.n_samples,
        },
    )
    _print_report(report, args.json)
    return 0


def cmd_selftest(args) -> int:
    if args.json:
        results = collect_results()
        doc = {
            "checks": [
                {"name": name, "passed": ok, **({"detail": detail} if detail else {})}
                for name, ok, detail in results
            ],
            "passed": sum(ok for _, ok, _ in results),
            "total": len(results),
        }
        print(json.dumps(doc, indent=2))
        return 0 if doc["passed"] == doc["total"] else 1
    failures = run_selftest(sys.stdout)
    return 0 if failures == 0 else 1


class _Parser(argparse.ArgumentParser):
    # route argparse usage problems through the validation exit path
    def error(self, message):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="instreval",
        description="Numerical evaluation toolkit for sample-based instrument embeddings.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)

    def add(name: str, func, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--json", action="store_true", help="emit the structured report")
        return p

    p = add("fad", cmd_fad, "Frechet distance between two embedding populations")
    p.add_argument("--ref", required=True, help="reference population manifest")
    p.add_argument("--test", required=True, help="test population manifest")
    p.add_argument("--paper-literal", action="store_true",
                   help="use the printed plus-sign form of the covariance cross term")
    p.add_argument("--ddof", type=int, default=0,
                   help="covariance denominator offset (default 0)")
    p.add_argument("--with-matrices", action="store_true",
                   help="embed means and covariances in the JSON report")

    p = add("tc", cmd_tc, "timbral consistency between matched instruments")
    p.add_argument("--test", required=True, help="test population manifest")
    p.add_argument("--ref", help="reference population manifest (non-star mode)")
    p.add_argument("--star", action="store_true",
                   help="compare against accumulated ground statistics")
    p.add_argument("--stats", help="ground statistics bundle (star mode)")

    p = add("clapscore", cmd_clapscore, "mean paired cosine between two populations")
    p.add_argument("--ref", required=True, help="reference population manifest")
    p.add_argument("--test", required=True, help="test population manifest")
    p.add_argument("--mode", choices=("per_sample", "per_instrument"),
                   default="per_sample", help="aggregation mode")

    p = add("t2i-score", cmd_t2i, "prompt adherence against a synthesized reference")
    p.add_argument("--prompt", required=True, help="single-record prompt manifest")
    p.add_argument("--generated", required=True, help="generated instrument manifest")
    p.add_argument("--stats", required=True, help="ground statistics bundle")
    p.add_argument("--method", choices=METHODS, default="naive",
                   help="reference synthesis method")
    p.add_argument("--paper-literal", action="store_true",
                   help="use the printed translation direction")
    p.add_argument("--gram-tol", type=float, default=GRAM_MATCH_RTOL,
                   help="relative Frobenius tolerance for the colored Gram")

    p = add("build-stats", cmd_build_stats, "accumulate ground statistics from a population")
    p.add_argument("--ref", required=True, help="reference population manifest")
    p.add_argument("--out", required=True, help="output statistics bundle")

    p = add("pairgen", cmd_pairgen, "emit conditioning example pairs")
    p.add_argument("--manifest", required=True, help="population manifest (keys only)")
    p.add_argument("--scheme", required=True, choices=SCHEMES, help="pairing scheme")
    p.add_argument("--seed", required=True, type=int, help="generator seed")
    p.add_argument("--drop", type=float, default=DEFAULT_DROP,
                   help="metadata dropout probability (default 0.3)")
    p.add_argument("--out", help="pair file path; omitted = stdout")

    p = add("synth", cmd_synth, "write a synthetic embedding population")
    p.add_argument("--preset", required=True, choices=SYNTH_PRESETS, help="generator preset")
    p.add_argument("--dz", required=True, type=int, help="embedding dimension")
    p.add_argument("--instruments", required=True, type=int, help="instrument count")
    p.add_argument("--cells", type=int, help="cells per instrument; omitted = full grid")
    p.add_argument("--noise", type=float, default=0.1, help="cluster noise scale")
    p.add_argument("--seed", required=True, type=int, help="generator seed")
    p.add_argument("--out", required=True, help="output manifest path")

    add("selftest", cmd_selftest, "run the built-in oracle suite")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
