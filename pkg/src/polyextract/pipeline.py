"""Three-stage extraction over document bundles.

Stage 1 prompts a text model with the article source and parses sample
records out of the reply.  Stage 2 (text+images mode) shows each figure
to a vision model along with the stage-1 samples and collects per-image
expansions; a returned composition that does not align with any stage-1
sample is discarded, since this stage may only enrich samples the text
already established.  Stage 3 merges the expansions back into the
stage-1 list.  Optionally, figure directives in the source are first
replaced by linearized tables from a chart-reading model.

Model output parsing is deliberately lenient (code fences stripped,
JSON values recovered from surrounding prose) and every repair or drop
is recorded as a diagnostic in the run manifest.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Sequence

from . import prompts
from .clients import ModelClient, request_key
from .errors import DataError, SchemaError, UpstreamError, UsageError
from .metrics import discrete_frechet
from .model import (
    PROPERTY_NAMES,
    Curve,
    DocumentBundle,
    Domain,
    PaperRecord,
    SampleRecord,
    normalize_label,
    sample_from_dict,
)
from .scoring import align_samples

PIPELINE_MODES = ("text_only", "text_plus_images")


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = "text_only"
    deplot_substitution: bool = False
    stage1_template: str | None = None
    stage2_template: str | None = None
    epsilon_dup: float = 1e-9

    def __post_init__(self):
        if self.mode not in PIPELINE_MODES:
            raise DataError(
                f"unknown pipeline mode {self.mode!r}; expected one of {PIPELINE_MODES}"
            )
        if self.epsilon_dup < 0:
            raise DataError("epsilon_dup must be non-negative")


@dataclass(frozen=True)
class PipelineClients:
    text: ModelClient
    vision: ModelClient | None = None
    chart: ModelClient | None = None


# ---------------------------------------------------------------------------
# Lenient model-output parsing
# ---------------------------------------------------------------------------

_PNC_SAMPLE_KEYS = {
    "matrix component",
    "matrix abbreviation",
    "filler chemical name",
    "filler abbreviation",
    "filler pst",
    "filler mass",
    "filler volume",
    "properties",
}
_PBD_SAMPLE_KEYS = {
    "polymer type",
    "substitution type",
    "degree of substitution",
    "comonomer type",
    "degree of hydrolysis",
    "molecular weight",
    "molecular weight unit",
    "biodegradation test type",
    "biodegradation",
}
_WS_RUN = re.compile(r"\s+")


def _strip_code_fences(text: str) -> str:
    return "\n".join(
        line for line in text.splitlines() if not line.lstrip().startswith("```")
    )


def recover_json_values(text: str) -> list[Any]:
    """Pull JSON values out of free-form model output.

    Tries the whole reply first (after dropping code-fence lines); when
    that fails, scans for parseable objects and arrays embedded in
    surrounding prose.
    """
    stripped = _strip_code_fences(text).strip()
    if not stripped:
        return []
    try:
        return [json.loads(stripped)]
    except json.JSONDecodeError:
        pass
    decoder = json.JSONDecoder()
    values: list[Any] = []
    i = 0
    while i < len(stripped):
        if stripped[i] not in "[{":
            i += 1
            continue
        try:
            value, end = decoder.raw_decode(stripped, i)
        except json.JSONDecodeError:
            i += 1
            continue
        values.append(value)
        i = end
    return values


def _looks_like_sample(obj: dict, domain: Domain) -> bool:
    keys = _PNC_SAMPLE_KEYS if domain is Domain.PNC else _PBD_SAMPLE_KEYS
    return any(
        _WS_RUN.sub(" ", str(k).strip().replace("_", " ")).lower() in keys for k in obj
    )


def parse_model_samples(
    text: str, domain: Domain, diagnostics: list[str]
) -> list[SampleRecord]:
    """Parse sample records out of a model reply, dropping what cannot be used."""
    candidates: list[dict] = []
    for value in recover_json_values(text):
        if isinstance(value, dict):
            candidates.append(value)
        elif isinstance(value, list):
            for entry in value:
                if isinstance(entry, dict):
                    candidates.append(entry)
                elif entry is not None:
                    diagnostics.append("dropped non-object array entry in model output")
    samples = []
    for index, obj in enumerate(candidates):
        if not _looks_like_sample(obj, domain):
            diagnostics.append(f"object #{index} has no recognizable sample fields")
            continue
        try:
            sample = sample_from_dict(obj, domain, diagnostics=diagnostics)
        except SchemaError as exc:
            diagnostics.append(f"dropped unusable sample object #{index}: {exc}")
            continue
        if not sample.composition.present_fields() and not sample.properties:
            diagnostics.append(f"dropped empty sample object #{index}")
            continue
        samples.append(sample)
    return samples


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

def extract_text_samples(
    doc: DocumentBundle,
    client: ModelClient,
    cfg: PipelineConfig,
    domain: Domain,
    diagnostics: list[str],
) -> list[SampleRecord]:
    """Stage 1: extract samples from the article text alone."""
    if not doc.latex_source.strip():
        raise DataError(f"{doc.paper_id}: document has no text")
    prompt = prompts.text_extraction_prompt(doc.latex_source, domain, cfg.stage1_template)
    reply = client.complete_text(prompt)
    return parse_model_samples(reply, domain, diagnostics)


def expand_with_image(
    samples: Sequence[SampleRecord],
    image_payload: bytes,
    client: ModelClient,
    cfg: PipelineConfig,
    domain: Domain,
    diagnostics: list[str],
) -> list[SampleRecord]:
    """Stage 2: ask the vision model what one figure adds to the samples.

    Returned records whose composition does not align with any stage-1
    sample (no field in common) are discarded: this stage may not invent
    samples the text never mentioned.
    """
    prompt = prompts.image_expansion_prompt(samples, domain, cfg.stage2_template)
    reply = client.complete_multimodal(prompt, image_payload)
    returned = parse_model_samples(reply, domain, diagnostics)
    kept = []
    for record in returned:
        if samples:
            alignment = align_samples([record], samples)
            best = max((c.f1 for c in alignment.pair_counts), default=0.0)
        else:
            best = 0.0
        if best > 0.0:
            kept.append(record)
        else:
            diagnostics.append(
                "discarded image-stage sample that matches no text-stage composition"
            )
    return kept


def _same_header(a: Curve, b: Curve) -> bool:
    return normalize_label(a.x_header) == normalize_label(b.x_header) and normalize_label(
        a.y_header
    ) == normalize_label(b.y_header)


def _is_duplicate(a: Curve, b: Curve, epsilon: float) -> bool:
    if a.property_name != b.property_name or not _same_header(a, b):
        return False
    if not a.points and not b.points:
        return True
    if not a.points or not b.points:
        return False
    return discrete_frechet(a.points, b.points) < epsilon


def merge(
    text_samples: Sequence[SampleRecord],
    image_expansions: Sequence[Sequence[SampleRecord]],
    *,
    epsilon_dup: float = 1e-9,
) -> list[SampleRecord]:
    """Stage 3: fold per-image expansions back into the stage-1 samples.

    Expansion curves attach to the stage-1 sample their composition
    aligns with, sorted by (property category, image index) after the
    text-stage curves.  A newly added curve that duplicates a kept one
    (same category, same normalized headers, Frechet distance under
    epsilon_dup) is collapsed into it, keeping the longer point
    sequence.  With no expansions the input comes back unchanged.
    """
    added: list[list[tuple[int, int, Curve]]] = [[] for _ in text_samples]
    for image_index, expansion in enumerate(image_expansions):
        if not expansion or not text_samples:
            continue
        alignment = align_samples(expansion, text_samples)
        for (i, j), counts in zip(alignment.pairs, alignment.pair_counts):
            if counts.f1 <= 0.0:
                continue
            for curve in expansion[i].properties:
                rank = PROPERTY_NAMES.index(curve.property_name)
                added[j].append((rank, image_index, curve))
    out = []
    for sample, new_curves in zip(text_samples, added):
        kept = list(sample.properties)
        for _, _, curve in sorted(new_curves, key=lambda entry: entry[:2]):
            duplicate = next(
                (k for k, existing in enumerate(kept) if _is_duplicate(existing, curve, epsilon_dup)),
                None,
            )
            if duplicate is None:
                kept.append(curve)
            elif len(curve.points) > len(kept[duplicate].points):
                kept[duplicate] = curve
        out.append(SampleRecord(sample.composition, tuple(kept)))
    return out


# ---------------------------------------------------------------------------
# Figure substitution
# ---------------------------------------------------------------------------

_FIGURE_DIRECTIVE = re.compile(r"\\includegraphics\s*(?:\[[^\]]*\])?\s*\{([^{}]*)\}")


def substitute_figures(
    doc: DocumentBundle,
    chart_client: ModelClient,
    diagnostics: list[str] | None = None,
) -> DocumentBundle:
    """Replace figure-inclusion directives with linearized chart tables.

    Each directive becomes a fenced block tagged with the image id; all
    other text is untouched.  A directive whose image cannot be found or
    whose chart request fails is left in place with a diagnostic, so one
    bad figure never takes down the document.
    """
    diag = diagnostics if diagnostics is not None else []
    index: dict[str, Any] = {}
    for image in doc.images:
        for alias in {image.image_id, image.image_id.rsplit(".", 1)[0]}:
            index.setdefault(alias, image)

    def lookup(target: str):
        name = target.rsplit("/", 1)[-1]
        for alias in (target, name, name.rsplit(".", 1)[0]):
            if alias in index:
                return index[alias]
        return None

    def replace(match: re.Match) -> str:
        target = match.group(1).strip()
        image = lookup(target)
        if image is None:
            diag.append(f"figure {target!r}: no matching image file")
            return match.group(0)
        try:
            table = chart_client.complete_multimodal(
                prompts.CHART_TO_TABLE_PROMPT, image.payload
            )
        except UpstreamError as exc:
            diag.append(f"figure {target!r}: chart request failed: {exc}")
            return match.group(0)
        return f"```chart-table {image.image_id}\n{table.strip()}\n```"

    return DocumentBundle(
        doc.paper_id, _FIGURE_DIRECTIVE.sub(replace, doc.latex_source), doc.images
    )


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

class _CountingClient(ModelClient):
    """Pass-through wrapper recording request keys for the manifest."""

    def __init__(self, inner: ModelClient):
        self.inner = inner
        self.identity = inner.identity
        self.text_keys: list[str] = []
        self.multimodal_keys: list[str] = []

    def complete_text(self, prompt: str) -> str:
        self.text_keys.append(request_key(prompt))
        return self.inner.complete_text(prompt)

    def complete_multimodal(self, prompt: str, image: bytes) -> str:
        self.multimodal_keys.append(request_key(prompt, image))
        return self.inner.complete_multimodal(prompt, image)


def _sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def run_pipeline(
    doc: DocumentBundle,
    domain: Domain,
    cfg: PipelineConfig,
    clients: PipelineClients,
) -> tuple[PaperRecord, dict]:
    """Run the full extraction for one document.

    Returns the extracted paper and a manifest describing the run: client
    identities, request keys, per-stage diagnostics, and the outcome.  An
    upstream failure in stage 1 or 2 aborts this paper only; the manifest
    records the failure point and the paper comes back empty.
    """
    domain = Domain.parse(domain)
    if clients.text is None:
        raise UsageError("pipeline requires a text client")
    if cfg.mode == "text_plus_images" and clients.vision is None:
        raise UsageError("text_plus_images mode requires a vision client")
    if cfg.deplot_substitution and clients.chart is None:
        raise UsageError("figure substitution requires a chart client")

    started = datetime.now(timezone.utc)
    diagnostics: list[str] = []
    text_client = _CountingClient(clients.text)
    vision_client = _CountingClient(clients.vision) if clients.vision else None
    chart_client = _CountingClient(clients.chart) if clients.chart else None

    status = "ok"
    failure_stage = None
    error = None
    prepared = doc
    record = PaperRecord(doc.paper_id, domain, ())
    stage = "substitute_figures"
    try:
        if cfg.deplot_substitution:
            prepared = substitute_figures(doc, chart_client, diagnostics)
        stage = "text_extraction"
        samples = extract_text_samples(prepared, text_client, cfg, domain, diagnostics)
        expansions: list[list[SampleRecord]] = []
        if cfg.mode == "text_plus_images":
            stage = "image_expansion"
            for image in prepared.images:
                expansions.append(
                    expand_with_image(
                        samples, image.payload, vision_client, cfg, domain, diagnostics
                    )
                )
        record = PaperRecord(
            doc.paper_id, domain, tuple(merge(samples, expansions, epsilon_dup=cfg.epsilon_dup))
        )
    except UpstreamError as exc:
        status = "failed"
        failure_stage = stage
        error = str(exc)
    finished = datetime.now(timezone.utc)

    def _client_block(counting: _CountingClient | None) -> dict | None:
        if counting is None:
            return None
        return {
            "identity": counting.identity,
            "text_requests": len(counting.text_keys),
            "multimodal_requests": len(counting.multimodal_keys),
            "request_keys": counting.text_keys + counting.multimodal_keys,
        }

    manifest = {
        "paper_id": doc.paper_id,
        "domain": domain.value,
        "mode": cfg.mode,
        "deplot_substitution": cfg.deplot_substitution,
        "epsilon_dup": cfg.epsilon_dup,
        "document_sha256": _sha256_text(doc.latex_source),
        "prepared_document_sha256": _sha256_text(prepared.latex_source),
        "image_count": len(doc.images),
        "clients": {
            "text": _client_block(text_client),
            "vision": _client_block(vision_client),
            "chart": _client_block(chart_client),
        },
        "sample_count": len(record.samples),
        "status": status,
        "failure_stage": failure_stage,
        "error": error,
        "diagnostics": diagnostics,
        "timing": {
            "started": started.isoformat(),
            "finished": finished.isoformat(),
            "seconds": (finished - started).total_seconds(),
        },
    }
    return record, manifest
