"""Pinned evaluation switches and their fingerprint.

Every switch that changes a reported number lives here so a report can
record exactly how it was produced.  Defaults are the pinned choices;
the alternatives exist for sensitivity analysis.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

HEADER_JOIN_MODES = ("concat", "mean")
CURVE_NORM_MODES = ("frobenius", "bbox")
AGGREGATION_MODES = ("macro", "micro")


@dataclass(frozen=True)
class EvalConfig:
    """Decision switches for the scoring pipeline.

    header_join
        "concat": one edit distance over the x and y labels joined into a
        single string.  "mean": average of the two per-label similarities.
    curve_norm
        Norm of the ground-truth curve used to normalize the Fréchet
        distance: "frobenius" (flat Euclidean norm of all coordinates) or
        "bbox" (bounding-box diagonal).
    aggregation
        "macro": mean of per-paper columns, each paper weighted equally.
        "micro": columns recomputed from corpus-wide tallies.
    """

    header_join: str = "concat"
    curve_norm: str = "frobenius"
    aggregation: str = "macro"

    def __post_init__(self):
        if self.header_join not in HEADER_JOIN_MODES:
            raise ValueError(f"header_join must be one of {HEADER_JOIN_MODES}")
        if self.curve_norm not in CURVE_NORM_MODES:
            raise ValueError(f"curve_norm must be one of {CURVE_NORM_MODES}")
        if self.aggregation not in AGGREGATION_MODES:
            raise ValueError(f"aggregation must be one of {AGGREGATION_MODES}")

    def fingerprint(self) -> str:
        """Stable one-line summary of every switch, for report provenance."""
        parts = [f"{f.name}={getattr(self, f.name)}" for f in fields(self)]
        return "|".join(sorted(parts))


DEFAULT_CONFIG = EvalConfig()
