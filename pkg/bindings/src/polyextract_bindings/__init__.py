"""Plain-data bindings for the evaluation toolkit.

Thin wrappers around the core package for notebook and scripting use:
inputs are plain mappings, sequences, and paths; outputs are floats and
flat dicts.  Every number is produced by the core package; nothing is
recomputed here, so binding output is bit-identical to what the library
and its command line report on the same inputs.

Errors propagate as the core package's typed exceptions (re-exported
below), carrying the original diagnostic text.  All functions are
stateless and safe to call from multiple threads.
"""

from dataclasses import asdict
from typing import Mapping, Sequence

import polyextract
from polyextract import (
    Curve,
    DataError,
    ParseError,
    SchemaError,
    curve_similarity,
    discrete_frechet,
    load_paper_dir,
    score_paper,
)

__version__ = polyextract.__version__

__all__ = [
    "__version__",
    "DataError",
    "ParseError",
    "SchemaError",
    "bound_css",
    "bound_discrete_frechet",
    "bound_score_paper",
]


def _as_curve(value) -> Curve:
    """Convert a serialized curve mapping (or a Curve) to the core model."""
    if isinstance(value, Curve):
        return value
    if not isinstance(value, Mapping):
        raise DataError(f"curve must be a mapping or a Curve, got {type(value).__name__}")
    name = value.get("property name", value.get("property_name"))
    headers = value.get("headers")
    if headers is None:
        headers = (value.get("x_header", ""), value.get("y_header", ""))
    if not isinstance(headers, Sequence) or isinstance(headers, str) or len(headers) != 2:
        raise DataError("curve headers must be a 2-element sequence of labels")
    return Curve(name, headers[0] or "", headers[1] or "", value.get("data") or ())


def bound_css(pred_curve, truth_curve) -> dict:
    """Curve similarity of two curves, as a flat map.

    Curves may be Curve objects or serialized mappings with the keys
    ``property name`` (or ``property_name``), ``headers`` (or
    ``x_header``/``y_header``), and ``data``.
    """
    breakdown = curve_similarity(_as_curve(pred_curve), _as_curve(truth_curve))
    return {
        "header_factor": breakdown.header_factor,
        "curve_factor": breakdown.curve_factor,
        "css": breakdown.css,
    }


def bound_discrete_frechet(p, q) -> float:
    """Discrete Frechet distance between two (x, y) point sequences."""
    return discrete_frechet(
        [(float(x), float(y)) for x, y in p],
        [(float(x), float(y)) for x, y in q],
    )


def bound_score_paper(pred_path, truth_path, domain: str = "pnc") -> dict:
    """Score one predicted paper directory against a ground-truth directory.

    Both paths hold ``sample_*.json`` files.  The truth directory's name
    is the paper id; the prediction is loaded under the same id so the
    directories may be named differently.  Returns the full report row
    as a flat map (the six columns plus the raw counts).
    """
    truth = load_paper_dir(truth_path, domain)
    pred = load_paper_dir(pred_path, domain, paper_id=truth.paper_id)
    return asdict(score_paper(pred, truth))
