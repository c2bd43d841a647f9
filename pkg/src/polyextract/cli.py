"""Command-line interface.

Commands: evaluate (score a predicted corpus against gold), baseline
(build and apply the majority-vote property baseline), extract (run the
model pipeline over documents), correlate (compare automated scores to
human ratings), validate (check a corpus against the data invariants).

Exit codes: 0 success, 1 usage error, 2 data error, 3 upstream-service
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .baseline import ROUNDING_MODES, build_profile, expand_with_baseline, save_profile
from .clients import load_clients_config, load_transcript
from .config import (
    AGGREGATION_MODES,
    CURVE_NORM_MODES,
    HEADER_JOIN_MODES,
    EvalConfig,
)
from .errors import DataError, UpstreamError, UsageError
from .metrics import pearson, permutation_pvalue, spearman
from .model import Domain, load_corpus, load_document_corpus, validate_paper, write_paper_dir
from .pipeline import PipelineClients, PipelineConfig, run_pipeline
from .scoring import render_report, report_to_csv, report_to_json, score_corpus

_MODE_BY_FLAG = {"t-only": "text_only", "t+img": "text_plus_images"}


class _Parser(argparse.ArgumentParser):
    """argparse parser whose errors map to exit code 1, not argparse's 2."""

    def error(self, message):
        raise UsageError(message)


def _add_domain(parser) -> None:
    parser.add_argument(
        "--domain",
        required=True,
        choices=[d.value for d in Domain],
        help="sample schema: pnc (nanocomposites) or pbd (biodegradation)",
    )


def _add_eval_switches(parser) -> None:
    parser.add_argument(
        "--header-join",
        choices=HEADER_JOIN_MODES,
        default="concat",
        help="compare joined header labels, or average per-axis distances",
    )
    parser.add_argument(
        "--curve-norm",
        choices=CURVE_NORM_MODES,
        default="frobenius",
        help="scale for the Frechet distance: coordinate norm or bbox diagonal",
    )
    parser.add_argument(
        "--agg",
        choices=AGGREGATION_MODES,
        default="macro",
        help="corpus aggregation: equal paper weight (macro) or pooled counts (micro)",
    )


def _eval_config(args) -> EvalConfig:
    return EvalConfig(
        header_join=args.header_join, curve_norm=args.curve_norm, aggregation=args.agg
    )


def _require_dir(path: Path, what: str) -> Path:
    if not path.is_dir():
        raise UsageError(f"{what} directory not found: {path}")
    return path


def build_parser() -> _Parser:
    parser = _Parser(
        prog="polyextract",
        description="Evaluate, baseline, and run structured extraction of "
        "material-sample records from polymer literature.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evaluate", help="score a predicted corpus against gold annotations")
    p.add_argument("--gold", required=True, type=Path, help="gold corpus directory")
    p.add_argument("--pred", required=True, type=Path, help="predicted corpus directory")
    p.add_argument("--out", required=True, type=Path, help="where to write report files")
    _add_domain(p)
    _add_eval_switches(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="build the majority-vote baseline and apply it")
    p.add_argument("--validation", required=True, type=Path, help="validation corpus directory")
    p.add_argument(
        "--pred", required=True, type=Path,
        help="corpus whose compositions receive the baseline curves",
    )
    p.add_argument("--out", required=True, type=Path, help="output directory")
    _add_domain(p)
    p.add_argument("--rounding", choices=ROUNDING_MODES, default="half-up",
                   help="how fractional per-sample curve counts become copy counts")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("extract", help="run the extraction pipeline over documents")
    p.add_argument("--docs", required=True, type=Path, help="document corpus directory")
    p.add_argument("--out", required=True, type=Path, help="output corpus directory")
    _add_domain(p)
    p.add_argument("--mode", choices=sorted(_MODE_BY_FLAG), default="t-only",
                   help="text-only extraction, or text plus per-figure expansion")
    p.add_argument("--deplot", action="store_true",
                   help="replace figure directives with chart-model tables first")
    p.add_argument("--clients", type=Path, help="JSON config for live HTTP model clients")
    p.add_argument("--transcript", type=Path, help="scripted-responses file for offline replay")
    p.add_argument("--workers", type=int, default=1, help="papers processed concurrently")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("correlate", help="correlate automated scores with human ratings")
    p.add_argument("--human", required=True, type=Path, help="human ratings, one number per line")
    p.add_argument("--auto", required=True, type=Path, help="automated scores, one number per line")
    p.add_argument("--out", type=Path, help="optional JSON output file")
    p.add_argument("--seed", type=int, default=0, help="permutation-test seed")
    p.add_argument("--permutations", type=int, default=10_000)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("validate", help="check a corpus against the data invariants")
    p.add_argument("--pred", required=True, type=Path, help="corpus directory to check")
    _add_domain(p)
    p.set_defaults(func=cmd_validate)

    return parser


def cmd_evaluate(args) -> int:
    _require_dir(args.gold, "gold")
    _require_dir(args.pred, "prediction")
    config = _eval_config(args)
    truth = load_corpus(args.gold, args.domain)
    if not truth:
        raise DataError(f"gold corpus {args.gold} has no paper directories")
    preds = load_corpus(args.pred, args.domain)
    gold_ids = {paper.paper_id for paper in truth}
    for paper in preds:
        if paper.paper_id not in gold_ids:
            print(
                f"warning: predicted paper {paper.paper_id!r} has no gold counterpart; ignored",
                file=sys.stderr,
            )
    report = score_corpus(preds, truth, config)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "report.json").write_text(report_to_json(report), encoding="utf-8")
    (args.out / "report.csv").write_text(report_to_csv(report), encoding="utf-8")
    sys.stdout.write(render_report(report))
    return 0


def cmd_baseline(args) -> int:
    _require_dir(args.validation, "validation")
    _require_dir(args.pred, "prediction")
    validation = load_corpus(args.validation, args.domain)
    profile = build_profile(validation)
    preds = load_corpus(args.pred, args.domain)
    args.out.mkdir(parents=True, exist_ok=True)
    save_profile(profile, args.out / "profile.json")
    diagnostics: list[str] = []
    for paper in preds:
        expanded = expand_with_baseline(
            paper, profile, rounding=args.rounding, diagnostics=diagnostics
        )
        write_paper_dir(expanded, args.out)
    for message in dict.fromkeys(diagnostics):
        print(f"warning: {message}", file=sys.stderr)
    print(
        f"profile over {profile.total_samples} samples "
        f"({len(profile.entries)} categories); expanded {len(preds)} papers into {args.out}"
    )
    return 0


def cmd_extract(args) -> int:
    _require_dir(args.docs, "document")
    if (args.clients is None) == (args.transcript is None):
        raise UsageError("exactly one of --clients or --transcript is required")
    mode = _MODE_BY_FLAG[args.mode]
    cfg = PipelineConfig(mode=mode, deplot_substitution=args.deplot)
    if args.transcript is not None:
        scripted = load_transcript(args.transcript)
        clients = PipelineClients(text=scripted, vision=scripted, chart=scripted)
    else:
        by_role = load_clients_config(args.clients)
        clients = PipelineClients(
            text=by_role["text"],
            vision=by_role.get("vision"),
            chart=by_role.get("chart"),
        )
    if mode == "text_plus_images" and clients.vision is None:
        raise UsageError("t+img mode needs a 'vision' client in the config")
    if args.deplot and clients.chart is None:
        raise UsageError("--deplot needs a 'chart' client in the config")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")

    bundles = load_document_corpus(args.docs)
    if not bundles:
        raise DataError(f"document corpus {args.docs} has no paper directories")
    domain = Domain.parse(args.domain)
    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            results = list(
                pool.map(lambda doc: run_pipeline(doc, domain, cfg, clients), bundles)
            )
    else:
        results = [run_pipeline(doc, domain, cfg, clients) for doc in bundles]

    args.out.mkdir(parents=True, exist_ok=True)
    failed = 0
    for record, manifest in results:
        paper_dir = write_paper_dir(record, args.out)
        (paper_dir / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        if manifest["status"] != "ok":
            failed += 1
            print(
                f"warning: {record.paper_id} failed at {manifest['failure_stage']}: "
                f"{manifest['error']}",
                file=sys.stderr,
            )
    print(f"extracted {len(results) - failed} of {len(results)} papers into {args.out}")
    return 3 if failed else 0


def _read_scores(path: Path) -> list[float]:
    if not path.is_file():
        raise UsageError(f"scores file not found: {path}")
    values = []
    for line_number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            values.append(float(text))
        except ValueError:
            raise DataError(f"{path}:{line_number}: not a number: {text!r}") from None
    if not values:
        raise DataError(f"{path}: no scores found")
    return values


def cmd_correlate(args) -> int:
    human = _read_scores(args.human)
    auto = _read_scores(args.auto)
    if len(human) != len(auto):
        raise DataError(
            f"score files disagree on length: {len(human)} human vs {len(auto)} automated"
        )
    r = pearson(human, auto)
    rho = spearman(human, auto)
    p_r = permutation_pvalue(
        human, auto, pearson, permutations=args.permutations, seed=args.seed
    )
    p_rho = permutation_pvalue(
        human, auto, spearman, permutations=args.permutations, seed=args.seed
    )
    result = {
        "observations": len(human),
        "pearson_r": r,
        "pearson_p": p_r,
        "spearman_rho": rho,
        "spearman_p": p_rho,
        "permutations": args.permutations,
        "seed": args.seed,
    }
    print(f"observations: {len(human)}")
    print(f"pearson r:    {r: .6f}   (permutation p = {p_r:.6f})")
    print(f"spearman rho: {rho: .6f}   (permutation p = {p_rho:.6f})")
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(json.dumps(result, indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_validate(args) -> int:
    _require_dir(args.pred, "corpus")
    corpus = load_corpus(args.pred, args.domain)
    total = 0
    for paper in corpus:
        for violation in validate_paper(paper):
            print(f"{paper.paper_id}: {violation}")
            total += 1
    if total:
        print(f"{total} violation(s) found")
        return 2
    print(f"{len(corpus)} paper(s) pass all checks")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except UpstreamError as exc:
        print(f"upstream error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
