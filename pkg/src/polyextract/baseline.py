"""Majority-vote property baseline.

From a validation corpus, each property category gets a profile entry:
the medoid curve (the one with the smallest cumulative Frechet distance
to the others), the most common x and y axis labels, and the mean number
of curves of that category per sample.  Applying the profile to a
predicted corpus replaces whatever curves the predictions carried with
the profile curves, which gives a floor for the curve columns that any
real extraction of figures has to beat.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import DataError
from .metrics import discrete_frechet
from .model import (
    PNC_PROPERTY_NAMES,
    PROPERTY_NAMES,
    Curve,
    Domain,
    PaperRecord,
    SampleRecord,
    normalize_label,
)

ROUNDING_MODES = ("half-up", "floor", "ceil")


@dataclass(frozen=True)
class BaselineEntry:
    """Profile of one property category over the validation corpus."""

    x_header: str
    y_header: str
    mean_count: float
    curve_count: int
    medoid: tuple[tuple[float, float], ...] | None


@dataclass(frozen=True)
class BaselineProfile:
    domain: Domain
    total_samples: int
    entries: Mapping[str, BaselineEntry]


def _modal_label(labels: Sequence[str]) -> str:
    """Most frequent label; frequency ties go to the lexicographically smallest."""
    counts = Counter(labels)
    return min(counts, key=lambda label: (-counts[label], label))


def _medoid(curves: Sequence[Curve]) -> tuple[tuple[float, float], ...] | None:
    """Point sequence minimizing cumulative Frechet distance to the others.

    Curves without points cannot be measured against and are excluded;
    distance ties are broken by comparing the point sequences themselves
    so the pick does not depend on input order.
    """
    candidates = [c.points for c in curves if c.points]
    if not candidates:
        return None
    if len(candidates) == 1:
        return candidates[0]
    distance = [[0.0] * len(candidates) for _ in candidates]
    for i in range(len(candidates)):
        for j in range(i + 1, len(candidates)):
            d = discrete_frechet(candidates[i], candidates[j])
            distance[i][j] = d
            distance[j][i] = d
    best = min(range(len(candidates)), key=lambda i: (sum(distance[i]), candidates[i]))
    return candidates[best]


def build_profile(validation: Sequence[PaperRecord]) -> BaselineProfile:
    """Build the majority-vote profile from a validation corpus.

    Categories with no curves in the corpus get no entry.  The profile is
    invariant under reordering of papers, samples, and curves.
    """
    if not validation:
        raise DataError("validation corpus is empty")
    domains = {paper.domain for paper in validation}
    if len(domains) != 1:
        raise DataError("validation corpus mixes pnc and pbd papers")
    domain = domains.pop()
    total_samples = sum(len(paper.samples) for paper in validation)
    if total_samples == 0:
        raise DataError("validation corpus has no samples")
    by_category: dict[str, list[Curve]] = {}
    for paper in validation:
        for sample in paper.samples:
            for curve in sample.properties:
                by_category.setdefault(curve.property_name, []).append(curve)
    entries = {}
    for category in PROPERTY_NAMES:
        curves = by_category.get(category)
        if not curves:
            continue
        entries[category] = BaselineEntry(
            x_header=_modal_label([normalize_label(c.x_header) for c in curves]),
            y_header=_modal_label([normalize_label(c.y_header) for c in curves]),
            mean_count=len(curves) / total_samples,
            curve_count=len(curves),
            medoid=_medoid(curves),
        )
    return BaselineProfile(domain, total_samples, entries)


def round_count(value: float, mode: str = "half-up") -> int:
    """Turn a fractional per-sample curve count into a copy count (>= 0)."""
    if mode == "half-up":
        return max(0, math.floor(value + 0.5))
    if mode == "floor":
        return max(0, math.floor(value))
    if mode == "ceil":
        return max(0, math.ceil(value))
    raise DataError(f"unknown rounding mode {mode!r}")


def expand_with_baseline(
    pred: PaperRecord,
    profile: BaselineProfile,
    *,
    rounding: str = "half-up",
    diagnostics: list[str] | None = None,
) -> PaperRecord:
    """Replace every sample's curves with the profile's baseline curves.

    Nanocomposite samples receive round(mean_count) copies of each
    category's medoid curve; biodegradation samples receive exactly one.
    A category whose entry lacks a medoid (all its validation curves were
    empty) is skipped with a diagnostic.
    """
    if pred.domain is not profile.domain:
        raise DataError(
            f"domain mismatch: paper is {pred.domain.value}, profile is {profile.domain.value}"
        )

    def baseline_curves() -> tuple[Curve, ...]:
        curves = []
        if profile.domain is Domain.PNC:
            for category in PNC_PROPERTY_NAMES:
                entry = profile.entries.get(category)
                if entry is None:
                    continue
                copies = round_count(entry.mean_count, rounding)
                if copies == 0:
                    continue
                if entry.medoid is None:
                    if diagnostics is not None:
                        diagnostics.append(
                            f"{category}: no usable medoid curve; category skipped"
                        )
                    continue
                curve = Curve(category, entry.x_header, entry.y_header, entry.medoid)
                curves.extend([curve] * copies)
        else:
            entry = profile.entries.get("biodegradation")
            if entry is None or entry.medoid is None:
                if diagnostics is not None:
                    diagnostics.append("no usable biodegradation medoid; samples left bare")
            else:
                curves.append(
                    Curve("biodegradation", entry.x_header, entry.y_header, entry.medoid)
                )
        return tuple(curves)

    template = baseline_curves()
    samples = tuple(
        SampleRecord(sample.composition, template) for sample in pred.samples
    )
    return PaperRecord(pred.paper_id, pred.domain, samples)


# ---------------------------------------------------------------------------
# Profile persistence
# ---------------------------------------------------------------------------

def profile_to_json(profile: BaselineProfile) -> str:
    payload = {
        "domain": profile.domain.value,
        "total_samples": profile.total_samples,
        "categories": {
            name: {
                "x_header": entry.x_header,
                "y_header": entry.y_header,
                "mean_count": entry.mean_count,
                "curve_count": entry.curve_count,
                "medoid": [list(p) for p in entry.medoid] if entry.medoid else None,
            }
            for name, entry in profile.entries.items()
        },
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def profile_from_json(text: str) -> BaselineProfile:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed profile file: {exc.msg}") from None
    try:
        entries = {
            name: BaselineEntry(
                x_header=raw["x_header"],
                y_header=raw["y_header"],
                mean_count=float(raw["mean_count"]),
                curve_count=int(raw["curve_count"]),
                medoid=(
                    tuple((float(x), float(y)) for x, y in raw["medoid"])
                    if raw.get("medoid")
                    else None
                ),
            )
            for name, raw in payload["categories"].items()
        }
        return BaselineProfile(
            Domain.parse(payload["domain"]), int(payload["total_samples"]), entries
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed profile file: {exc}") from None


def save_profile(profile: BaselineProfile, path: Path) -> None:
    Path(path).write_text(profile_to_json(profile), encoding="utf-8")


def load_profile(path: Path) -> BaselineProfile:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"profile file not found: {path}")
    return profile_from_json(path.read_text(encoding="utf-8"))
