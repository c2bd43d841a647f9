"""Builders shared across test modules: sample dicts, corpus directories."""

import json
from pathlib import Path

# Smallest valid PNG: 1x1 RGB pixel.
PNG_1PX = bytes.fromhex(
    "89504e470d0a1a0a0000000d4948445200000001000000010802000000907753de"
    "0000000c4944415408d763f8cfc000000301010018dd8db00000000049454e44ae426082"
)


def pnc_sample(**overrides) -> dict:
    base = {
        "Matrix Component": "epoxy resin",
        "Matrix Abbreviation": "ep",
        "Filler Chemical Name": "barium titanate",
        "Filler Abbreviation": "bto",
        "Filler PST": "null",
        "Filler Mass": "5%",
        "Filler Volume": "null",
        "Properties": [],
    }
    base.update(overrides)
    return base


def pbd_sample(**overrides) -> dict:
    base = {
        "Polymer Type": "cellulose acetate",
        "Substitution Type": "acetyl",
        "Degree of Substitution": "2.5",
        "Comonomer Type": "null",
        "Degree of Hydrolysis": "null",
        "Molecular Weight": "50000",
        "Molecular Weight Unit": "g/mol",
        "Biodegradation Test Type": "soil burial",
        "Biodegradation": {
            "header": ["time (days)", "weight loss (%)"],
            "data": [[0, 0], [30, 12]],
        },
    }
    base.update(overrides)
    return base


def curve_dict(
    name="thermal",
    x="temperature (c)",
    y="modulus (mpa)",
    data=((0.0, 1.0), (1.0, 2.0)),
) -> dict:
    return {
        "property name": name,
        "headers": [x, y],
        "data": [list(point) for point in data],
    }


def write_corpus(root: Path, papers: dict) -> Path:
    """Write {paper_id: [sample dicts]} as a corpus directory tree."""
    root.mkdir(parents=True, exist_ok=True)
    for paper_id, samples in papers.items():
        paper_dir = root / paper_id
        paper_dir.mkdir(exist_ok=True)
        for i, sample in enumerate(samples, 1):
            (paper_dir / f"sample_{i:03d}.json").write_text(
                json.dumps(sample, indent=4), encoding="utf-8"
            )
    return root
