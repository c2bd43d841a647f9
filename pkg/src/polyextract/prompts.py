"""Prompt builders for the extraction stages.

The builders are pure functions of their inputs, so a request's content
(and therefore its transcript key) can be reproduced exactly by tests
and replay fixtures.  Templates use the placeholders ``{article}`` and
``{samples}``; substitution is plain string replacement, so JSON braces
in the templates need no escaping.
"""

from __future__ import annotations

import json
from typing import Sequence

from .errors import DataError
from .model import Domain, SampleRecord, sample_to_dict

_PNC_SHAPE = """\
{
    "Matrix Component": "chemical name of the matrix polymer",
    "Matrix Abbreviation": "its abbreviation",
    "Filler Chemical Name": "chemical name of the filler",
    "Filler Abbreviation": "its abbreviation",
    "Filler PST": "particle surface treatment, if any",
    "Filler Mass": "filler mass fraction",
    "Filler Volume": "filler volume fraction",
    "Properties": [
        {
            "property name": "one of: thermal, electrical, mechanical, viscoelastic, volumetric, rheological",
            "headers": ["x axis label", "y axis label"],
            "data": [[x1, y1], [x2, y2]]
        }
    ]
}"""

_PBD_SHAPE = """\
{
    "Polymer Type": "chemical name of the polymer",
    "Substitution Type": "substituent group, if any",
    "Degree of Substitution": "numeric degree of substitution",
    "Comonomer Type": "comonomer, if any",
    "Degree of Hydrolysis": "numeric degree of hydrolysis",
    "Molecular Weight": "numeric molecular weight",
    "Molecular Weight Unit": "unit of the molecular weight",
    "Biodegradation Test Type": "the biodegradation test used",
    "Biodegradation": {
        "header": ["x axis label", "y axis label"],
        "data": [[x1, y1], [x2, y2]]
    }
}"""

_SHARED_RULES = """\
- Write the string "null" for any attribute the article does not state.
- Copy numeric values exactly as the article gives them; do not convert units.
- Return only the JSON array, with no commentary."""

_PNC_RULES = (
    """\
- "Filler Mass" and "Filler Volume" are percentages; write the number followed by a %.
- List every distinct sample separately, including samples that differ only in filler loading.
"""
    + _SHARED_RULES
)

_PBD_RULES = _SHARED_RULES

TEXT_EXTRACTION_TEMPLATE_PNC = f"""\
You extract structured data about material samples from scientific articles.

Read the article below and list every polymer nanocomposite sample it reports. \
Return a JSON array with one object per sample, shaped exactly like this:

{_PNC_SHAPE}

Rules:
{_PNC_RULES}

Article:

{{article}}
"""

TEXT_EXTRACTION_TEMPLATE_PBD = f"""\
You extract structured data about material samples from scientific articles.

Read the article below and list every polymer biodegradation sample it reports. \
Return a JSON array with one object per sample, shaped exactly like this:

{_PBD_SHAPE}

Rules:
{_PBD_RULES}

Article:

{{article}}
"""

IMAGE_EXPANSION_TEMPLATE_PNC = f"""\
You extract structured data about material samples from figures in scientific articles.

The following samples were extracted from the article's text:

{{samples}}

First identify which of these samples appear in the attached figure, then read off \
the property curve the figure shows for each of them. Return a JSON array containing \
only the samples that appear in the figure. Copy each sample's composition fields \
unchanged and put the curve you read into its "Properties" list, shaped like this:

{{
    "property name": "one of: thermal, electrical, mechanical, viscoelastic, volumetric, rheological",
    "headers": ["x axis label", "y axis label"],
    "data": [[x1, y1], [x2, y2]]
}}

Rules:
- Do not invent samples that are not in the list above.
- Use "null" for anything the figure does not show.
- Return only the JSON array, with no commentary.
"""

IMAGE_EXPANSION_TEMPLATE_PBD = f"""\
You extract structured data about material samples from figures in scientific articles.

The following samples were extracted from the article's text:

{{samples}}

First identify which of these samples appear in the attached figure, then read off \
the biodegradation curve the figure shows for each of them. Return a JSON array \
containing only the samples that appear in the figure. Copy each sample's \
composition fields unchanged and fill its "Biodegradation" entry:

{{
    "header": ["x axis label", "y axis label"],
    "data": [[x1, y1], [x2, y2]]
}}

Rules:
- Do not invent samples that are not in the list above.
- Use "null" for anything the figure does not show.
- Return only the JSON array, with no commentary.
"""

CHART_TO_TABLE_PROMPT = """\
Convert the attached chart into its underlying data table. Output one header row \
naming the two axes, then one row per data point, with cells separated by " | " \
and rows separated by newlines. Output only the table.
"""


def serialize_samples_for_prompt(samples: Sequence[SampleRecord]) -> str:
    """Deterministic JSON rendering of samples for the expansion prompt."""
    return json.dumps(
        [sample_to_dict(s) for s in samples], indent=2, ensure_ascii=False
    )


def _fill(template: str, placeholder: str, value: str) -> str:
    if placeholder not in template:
        raise DataError(f"prompt template is missing the {placeholder} placeholder")
    return template.replace(placeholder, value)


def text_extraction_prompt(
    latex_source: str, domain: Domain, template: str | None = None
) -> str:
    if template is None:
        template = (
            TEXT_EXTRACTION_TEMPLATE_PNC
            if Domain.parse(domain) is Domain.PNC
            else TEXT_EXTRACTION_TEMPLATE_PBD
        )
    return _fill(template, "{article}", latex_source)


def image_expansion_prompt(
    samples: Sequence[SampleRecord], domain: Domain, template: str | None = None
) -> str:
    if template is None:
        template = (
            IMAGE_EXPANSION_TEMPLATE_PNC
            if Domain.parse(domain) is Domain.PNC
            else IMAGE_EXPANSION_TEMPLATE_PBD
        )
    return _fill(template, "{samples}", serialize_samples_for_prompt(samples))
