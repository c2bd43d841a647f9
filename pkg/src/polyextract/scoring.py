"""Sample alignment, per-paper scoring, and corpus aggregation.

Scoring runs in two passes.  First, predicted and ground-truth samples
are matched one-to-one by maximizing summed composition F1 (slot-filling
counts over the composition fields).  Then, within each matched sample
pair, curves are matched one-to-one by maximizing summed curve
similarity, and the curve columns (headers, curves, CAS) are computed as
ratios of matched-pair sums over a shared denominator: every sample
pair's max(curve counts), plus the curves of samples that found no
partner at all.

Report columns per paper: precision, recall, F1 over composition slots;
headers, curves, CAS over property curves.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .assignment import optimal_assignment
from .config import DEFAULT_CONFIG, EvalConfig
from .errors import DataError
from .metrics import ScoreBreakdown, curve_similarity
from .model import Composition, Curve, PaperRecord, SampleRecord


@dataclass(frozen=True)
class PairCounts:
    """Slot-filling counts for one composition pair (or a paper total)."""

    tp: int
    fp: int
    fn: int

    @property
    def f1(self) -> float:
        denom = 2 * self.tp + self.fp + self.fn
        return 0.0 if denom == 0 else 2 * self.tp / denom


def composition_pair_score(pred: Composition, truth: Composition) -> PairCounts:
    """Field-level agreement between two compositions of the same schema.

    A field non-absent on both sides and equal after normalization is a
    true positive; a non-absent pair that disagrees counts once as a
    false positive and once as a false negative; one-sided fields count
    on their own side only.  Fields absent on both sides are ignored, so
    two empty compositions score f1 = 0 by the empty-denominator rule.
    """
    if type(pred) is not type(truth):
        raise DataError(
            f"composition schema mismatch: {type(pred).__name__} vs {type(truth).__name__}"
        )
    pred_fields = pred.normalized().present_fields()
    truth_fields = truth.normalized().present_fields()
    tp = sum(1 for name, value in truth_fields.items() if pred_fields.get(name) == value)
    return PairCounts(tp, len(pred_fields) - tp, len(truth_fields) - tp)


@dataclass(frozen=True)
class SampleAlignment:
    """Matched (pred, truth) sample indices plus paper-level slot totals."""

    pairs: tuple[tuple[int, int], ...]
    pair_counts: tuple[PairCounts, ...]
    totals: PairCounts


def align_samples(
    pred: Sequence[SampleRecord], truth: Sequence[SampleRecord]
) -> SampleAlignment:
    """One-to-one sample matching maximizing summed composition F1.

    Paper totals add, on top of the matched-pair counts, every non-absent
    field of an unmatched truth sample as a false negative and every
    non-absent field of an unmatched predicted sample as a false
    positive.
    """
    matrix = np.zeros((len(pred), len(truth)))
    counts = [
        [composition_pair_score(p.composition, t.composition) for t in truth]
        for p in pred
    ]
    for i, row in enumerate(counts):
        for j, pair in enumerate(row):
            matrix[i, j] = pair.f1
    assignment = optimal_assignment(matrix)
    pair_counts = tuple(counts[i][j] for i, j in assignment.pairs)
    tp = sum(c.tp for c in pair_counts)
    fp = sum(c.fp for c in pair_counts)
    fn = sum(c.fn for c in pair_counts)
    matched_pred = {i for i, _ in assignment.pairs}
    matched_truth = {j for _, j in assignment.pairs}
    for i, sample in enumerate(pred):
        if i not in matched_pred:
            fp += len(sample.composition.normalized().present_fields())
    for j, sample in enumerate(truth):
        if j not in matched_truth:
            fn += len(sample.composition.normalized().present_fields())
    return SampleAlignment(assignment.pairs, pair_counts, PairCounts(tp, fp, fn))


@dataclass(frozen=True)
class CurveAlignment:
    """Matched (pred, truth) curve indices with per-pair score breakdowns."""

    pairs: tuple[tuple[int, int], ...]
    breakdowns: tuple[ScoreBreakdown, ...]

    @property
    def total_css(self) -> float:
        return sum(b.css for b in self.breakdowns)


def align_curves(
    pred: Sequence[Curve], truth: Sequence[Curve], config: EvalConfig = DEFAULT_CONFIG
) -> CurveAlignment:
    """One-to-one curve matching maximizing summed curve similarity."""
    breakdown_rows = [[curve_similarity(p, t, config) for t in truth] for p in pred]
    matrix = np.zeros((len(pred), len(truth)))
    for i, row in enumerate(breakdown_rows):
        for j, b in enumerate(row):
            matrix[i, j] = b.css
    assignment = optimal_assignment(matrix)
    return CurveAlignment(
        assignment.pairs, tuple(breakdown_rows[i][j] for i, j in assignment.pairs)
    )


def curve_alignment_score(
    pred: Sequence[Curve], truth: Sequence[Curve], config: EvalConfig = DEFAULT_CONFIG
) -> float:
    """Summed matched curve similarity over max(len(pred), len(truth)).

    Two empty curve lists score 1.0: predicting no properties for a
    sample that has none is fully correct.
    """
    if not pred and not truth:
        return 1.0
    return align_curves(pred, truth, config).total_css / max(len(pred), len(truth))


def header_auto_score(
    pred: Curve, truth: Curve, config: EvalConfig = DEFAULT_CONFIG
) -> float:
    """Header agreement of one curve pair, for correlation with human ratings."""
    return curve_similarity(pred, truth, config).header_factor


def curve_auto_score(
    pred: Curve, truth: Curve, config: EvalConfig = DEFAULT_CONFIG
) -> float:
    """Shape agreement of one curve pair, for correlation with human ratings."""
    return curve_similarity(pred, truth, config).curve_factor


# ---------------------------------------------------------------------------
# Paper scores and corpus reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PaperScore:
    """Report row for one paper.

    The first six fields are the report columns; the remaining fields
    carry the raw sums they were computed from, which micro aggregation
    needs.  ``curve_slots`` is the shared denominator of the three curve
    columns: summed max(curve counts) over matched sample pairs plus all
    curves of unmatched samples on either side.
    """

    paper_id: str
    precision: float
    recall: float
    f1: float
    headers_score: float
    curves_score: float
    cas_score: float
    matched_sample_count: int
    matched_curve_count: int
    tp: int
    fp: int
    fn: int
    curve_slots: int
    cas_total: float
    headers_total: float
    curves_total: float

    COLUMNS = ("precision", "recall", "f1", "headers_score", "curves_score", "cas_score")


def _ratio(numerator: int, denominator: int, opposite: int) -> float:
    """Precision/recall with the vacuous convention.

    An empty denominator means nothing was predicted (precision) or
    nothing was annotated (recall); that is perfect if the opposite side
    is empty too and a total miss otherwise.
    """
    if denominator == 0:
        return 1.0 if opposite == 0 else 0.0
    return numerator / denominator


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _slot_ratio(total: float, slots: int) -> float:
    return 1.0 if slots == 0 else total / slots


def score_paper(
    pred: PaperRecord, truth: PaperRecord, config: EvalConfig = DEFAULT_CONFIG
) -> PaperScore:
    """Score one predicted paper against its ground truth."""
    if pred.paper_id != truth.paper_id:
        raise DataError(f"paper id mismatch: {pred.paper_id!r} vs {truth.paper_id!r}")
    if pred.domain is not truth.domain:
        raise DataError(
            f"domain mismatch for {truth.paper_id!r}: {pred.domain.value} vs {truth.domain.value}"
        )
    alignment = align_samples(pred.samples, truth.samples)
    totals = alignment.totals
    precision = _ratio(totals.tp, totals.tp + totals.fp, totals.fn)
    recall = _ratio(totals.tp, totals.tp + totals.fn, totals.fp)

    curve_slots = 0
    cas_total = 0.0
    headers_total = 0.0
    curves_total = 0.0
    matched_curve_count = 0
    for i, j in alignment.pairs:
        pred_curves = pred.samples[i].properties
        truth_curves = truth.samples[j].properties
        curve_slots += max(len(pred_curves), len(truth_curves))
        curve_alignment = align_curves(pred_curves, truth_curves, config)
        matched_curve_count += len(curve_alignment.pairs)
        for b in curve_alignment.breakdowns:
            cas_total += b.css
            headers_total += b.header_factor
            curves_total += b.curve_factor
    matched_pred = {i for i, _ in alignment.pairs}
    matched_truth = {j for _, j in alignment.pairs}
    for i, sample in enumerate(pred.samples):
        if i not in matched_pred:
            curve_slots += len(sample.properties)
    for j, sample in enumerate(truth.samples):
        if j not in matched_truth:
            curve_slots += len(sample.properties)

    return PaperScore(
        paper_id=truth.paper_id,
        precision=precision,
        recall=recall,
        f1=_f1(precision, recall),
        headers_score=_slot_ratio(headers_total, curve_slots),
        curves_score=_slot_ratio(curves_total, curve_slots),
        cas_score=_slot_ratio(cas_total, curve_slots),
        matched_sample_count=len(alignment.pairs),
        matched_curve_count=matched_curve_count,
        tp=totals.tp,
        fp=totals.fp,
        fn=totals.fn,
        curve_slots=curve_slots,
        cas_total=cas_total,
        headers_total=headers_total,
        curves_total=curves_total,
    )


@dataclass(frozen=True)
class CorpusReport:
    per_paper: tuple[PaperScore, ...]
    aggregates: dict[str, float]
    aggregation: str
    config_fingerprint: str


def aggregate(
    scores: Sequence[PaperScore], config: EvalConfig = DEFAULT_CONFIG
) -> CorpusReport:
    """Combine per-paper scores into one report, ordered by paper id.

    Macro aggregation averages the per-paper columns with equal weight;
    micro aggregation recomputes each column from the pooled counts and
    sums, so large papers weigh more.
    """
    if not scores:
        raise DataError("cannot aggregate an empty score list")
    ordered = tuple(sorted(scores, key=lambda s: s.paper_id))
    seen: set[str] = set()
    for score in ordered:
        if score.paper_id in seen:
            raise DataError(f"duplicate paper id {score.paper_id!r} in report")
        seen.add(score.paper_id)
    if config.aggregation == "macro":
        aggregates = {
            column: sum(getattr(s, column) for s in ordered) / len(ordered)
            for column in PaperScore.COLUMNS
        }
    else:
        tp = sum(s.tp for s in ordered)
        fp = sum(s.fp for s in ordered)
        fn = sum(s.fn for s in ordered)
        slots = sum(s.curve_slots for s in ordered)
        precision = _ratio(tp, tp + fp, fn)
        recall = _ratio(tp, tp + fn, fp)
        aggregates = {
            "precision": precision,
            "recall": recall,
            "f1": _f1(precision, recall),
            "headers_score": _slot_ratio(sum(s.headers_total for s in ordered), slots),
            "curves_score": _slot_ratio(sum(s.curves_total for s in ordered), slots),
            "cas_score": _slot_ratio(sum(s.cas_total for s in ordered), slots),
        }
    return CorpusReport(ordered, aggregates, config.aggregation, config.fingerprint())


def score_corpus(
    pred_papers: Sequence[PaperRecord],
    truth_papers: Sequence[PaperRecord],
    config: EvalConfig = DEFAULT_CONFIG,
) -> CorpusReport:
    """Score a predicted corpus against ground truth, paper by paper.

    Papers are paired by id; a truth paper without a predicted
    counterpart is scored against an empty prediction.
    """
    if not truth_papers:
        raise DataError("ground-truth corpus is empty")
    pred_by_id = {p.paper_id: p for p in pred_papers}
    scores = []
    for truth in truth_papers:
        pred = pred_by_id.get(
            truth.paper_id, PaperRecord(truth.paper_id, truth.domain, ())
        )
        scores.append(score_paper(pred, truth, config))
    return aggregate(scores, config)


# ---------------------------------------------------------------------------
# Report rendering
# ---------------------------------------------------------------------------

_CSV_HEADERS = {
    "precision": "P",
    "recall": "R",
    "f1": "F1",
    "headers_score": "Headers",
    "curves_score": "Curves",
    "cas_score": "CAS",
}


def report_to_json(report: CorpusReport) -> str:
    payload = {
        "config": report.config_fingerprint,
        "papers": [
            {
                "paper_id": s.paper_id,
                **{column: getattr(s, column) for column in PaperScore.COLUMNS},
                "matched_sample_count": s.matched_sample_count,
                "matched_curve_count": s.matched_curve_count,
                "tp": s.tp,
                "fp": s.fp,
                "fn": s.fn,
                "curve_slots": s.curve_slots,
            }
            for s in report.per_paper
        ],
        "aggregates": report.aggregates,
        "aggregation": report.aggregation,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def report_to_csv(report: CorpusReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["paper_id"] + [_CSV_HEADERS[c] for c in PaperScore.COLUMNS])
    for s in report.per_paper:
        writer.writerow(
            [s.paper_id] + [f"{getattr(s, c):.6f}" for c in PaperScore.COLUMNS]
        )
    writer.writerow(
        ["ALL"] + [f"{report.aggregates[c]:.6f}" for c in PaperScore.COLUMNS]
    )
    return buffer.getvalue()


def render_report(report: CorpusReport) -> str:
    """Fixed-width report for terminals: one row per paper plus the aggregate."""
    id_width = max([len("paper_id"), len("ALL")] + [len(s.paper_id) for s in report.per_paper])
    header = ["paper_id".ljust(id_width)] + [
        _CSV_HEADERS[c].rjust(8) for c in PaperScore.COLUMNS
    ]
    lines = ["  ".join(header)]
    for s in report.per_paper:
        lines.append(
            "  ".join(
                [s.paper_id.ljust(id_width)]
                + [f"{getattr(s, c):8.4f}" for c in PaperScore.COLUMNS]
            )
        )
    lines.append(
        "  ".join(
            ["ALL".ljust(id_width)]
            + [f"{report.aggregates[c]:8.4f}" for c in PaperScore.COLUMNS]
        )
    )
    lines.append(f"aggregation: {report.aggregation}   config: {report.config_fingerprint}")
    return "\n".join(lines) + "\n"
