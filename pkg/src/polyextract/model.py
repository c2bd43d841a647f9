"""Domain model and JSON (de)serialization for material-sample records.

Two sample schemas are supported:

* nanocomposite samples (:class:`CompositionPNC`): a polymer matrix plus a
  filler, with property curves drawn from six categories;
* biodegradation samples (:class:`CompositionPBD`): a polymer description
  with a single biodegradation curve.

On disk, one sample occupies one JSON file, one directory of
``sample_*.json`` files makes up a paper, and a directory of paper
directories makes up a corpus.  Predicted corpora mirror the same layout.

Null handling: the empty string, the literal string ``"null"`` (models are
instructed to emit it for missing attributes), and an absent/JSON-null
field are all one absent value.  Composition fields are stored fully
normalized (trimmed, lowercased, internal whitespace collapsed; bare
numeric mass/volume values gain a trailing ``%``), so equality on stored
values is meaningful.  Curve header labels are stored trimmed but
otherwise verbatim; label normalization happens at comparison time.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, fields
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Sequence

from .errors import DataError, ParseError, SchemaError


class Domain(str, Enum):
    PNC = "pnc"
    PBD = "pbd"

    @classmethod
    def parse(cls, value: "str | Domain") -> "Domain":
        if isinstance(value, Domain):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise DataError(f"unknown domain {value!r}; expected 'pnc' or 'pbd'") from None


PNC_PROPERTY_NAMES = (
    "thermal",
    "electrical",
    "mechanical",
    "viscoelastic",
    "volumetric",
    "rheological",
)
PROPERTY_NAMES = PNC_PROPERTY_NAMES + ("biodegradation",)

# Spellings that show up in model output (and in extraction prompts in the
# wild) mapped to their canonical category.
_PROPERTY_ALIASES = {
    "viscoealstic": "viscoelastic",
    "visco-elastic": "viscoelastic",
    "bio-degradation": "biodegradation",
    "bio degradation": "biodegradation",
}

_WS_RUN = re.compile(r"\s+")
_BARE_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:e[+-]?\d+)?")


def normalize_field(value: str | None) -> str | None:
    """Canonicalize a free-text field value.

    Trims, lowercases, and collapses internal whitespace runs; the empty
    string and the literal "null" map to absent (None).  Idempotent.
    """
    if value is None:
        return None
    text = _WS_RUN.sub(" ", value.strip()).lower()
    if text in ("", "null"):
        return None
    return text


def normalize_label(value: str | None) -> str:
    """Like :func:`normalize_field` but for header labels: absent becomes ""."""
    return normalize_field(value) or ""


def normalize_percentage(value: str | None) -> str | None:
    """Normalize a mass/volume composition value; bare numerics gain a '%'."""
    text = normalize_field(value)
    if text is not None and _BARE_NUMBER.fullmatch(text):
        return text + "%"
    return text


def canonical_property_name(value: str | None) -> str | None:
    """Map a property-category name to its canonical spelling, or None."""
    text = normalize_field(value)
    if text is None:
        return None
    text = _PROPERTY_ALIASES.get(text, text)
    return text if text in PROPERTY_NAMES else None


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompositionPNC:
    """Matrix/filler identity of a nanocomposite sample."""

    matrix_component: str | None = None
    matrix_abbreviation: str | None = None
    filler_chemical_name: str | None = None
    filler_abbreviation: str | None = None
    filler_pst: str | None = None
    filler_mass: str | None = None
    filler_volume: str | None = None

    _PERCENT_FIELDS = ("filler_mass", "filler_volume")

    def normalized(self) -> "CompositionPNC":
        values = {}
        for f in fields(self):
            norm = normalize_percentage if f.name in self._PERCENT_FIELDS else normalize_field
            values[f.name] = norm(getattr(self, f.name))
        return CompositionPNC(**values)

    def present_fields(self) -> dict[str, str]:
        """Non-absent fields, keyed by field name."""
        return {
            f.name: v for f in fields(self) if (v := getattr(self, f.name)) is not None
        }


@dataclass(frozen=True)
class CompositionPBD:
    """Polymer identity and test context of a biodegradation sample."""

    polymer_type: str | None = None
    substitution_type: str | None = None
    degree_of_substitution: str | None = None
    comonomer_type: str | None = None
    degree_of_hydrolysis: str | None = None
    molecular_weight: str | None = None
    molecular_weight_unit: str | None = None
    biodegradation_test_type: str | None = None

    def normalized(self) -> "CompositionPBD":
        return CompositionPBD(
            **{f.name: normalize_field(getattr(self, f.name)) for f in fields(self)}
        )

    def present_fields(self) -> dict[str, str]:
        return {
            f.name: v for f in fields(self) if (v := getattr(self, f.name)) is not None
        }


Composition = CompositionPNC | CompositionPBD


@dataclass(frozen=True)
class Curve:
    """A named property measurement series: headers plus ordered (x, y) points.

    An empty point sequence is representable (models often omit data) but
    such a curve can never earn curve-shape credit against a populated one.
    """

    property_name: str
    x_header: str = ""
    y_header: str = ""
    points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        name = canonical_property_name(self.property_name)
        if name is None:
            raise SchemaError(
                f"unknown property name {self.property_name!r}", field="property name"
            )
        object.__setattr__(self, "property_name", name)
        object.__setattr__(
            self,
            "points",
            tuple((float(x), float(y)) for x, y in self.points),
        )
        object.__setattr__(self, "x_header", (self.x_header or "").strip())
        object.__setattr__(self, "y_header", (self.y_header or "").strip())


@dataclass(frozen=True)
class SampleRecord:
    """One material sample: a composition plus its property curves."""

    composition: Composition
    properties: tuple[Curve, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "properties", tuple(self.properties))

    @property
    def domain(self) -> Domain:
        return Domain.PNC if isinstance(self.composition, CompositionPNC) else Domain.PBD


@dataclass(frozen=True)
class PaperRecord:
    """All samples extracted from (or annotated for) one article."""

    paper_id: str
    domain: Domain
    samples: tuple[SampleRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "domain", Domain.parse(self.domain))
        object.__setattr__(self, "samples", tuple(self.samples))


@dataclass(frozen=True)
class DocumentImage:
    image_id: str
    payload: bytes
    media_type: str = "image/png"


@dataclass(frozen=True)
class DocumentBundle:
    """Source article as LaTeX text plus its figure images."""

    paper_id: str
    latex_source: str
    images: tuple[DocumentImage, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))


# ---------------------------------------------------------------------------
# Schema keys
# ---------------------------------------------------------------------------

_PNC_FIELD_KEYS = {
    "matrix component": "matrix_component",
    "matrix abbreviation": "matrix_abbreviation",
    "filler chemical name": "filler_chemical_name",
    "filler abbreviation": "filler_abbreviation",
    "filler pst": "filler_pst",
    "filler mass": "filler_mass",
    "filler volume": "filler_volume",
}
_PBD_FIELD_KEYS = {
    "polymer type": "polymer_type",
    "substitution type": "substitution_type",
    "degree of substitution": "degree_of_substitution",
    "comonomer type": "comonomer_type",
    "degree of hydrolysis": "degree_of_hydrolysis",
    "molecular weight": "molecular_weight",
    "molecular weight unit": "molecular_weight_unit",
    "biodegradation test type": "biodegradation_test_type",
}
_PNC_TITLES = {v: k.title().replace("Pst", "PST") for k, v in _PNC_FIELD_KEYS.items()}
_PBD_TITLES = {v: k.title() for k, v in _PBD_FIELD_KEYS.items()}


def _canonical_key(key: str) -> str:
    return _WS_RUN.sub(" ", key.strip().replace("_", " ")).lower()


def _as_optional_text(value: Any, key: str) -> str | None:
    if value is None:
        return None
    if isinstance(value, str):
        return value
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        # Models sometimes emit numbers where the schema says text.
        return repr(value) if isinstance(value, float) else str(value)
    raise SchemaError(f"expected text or null, got {type(value).__name__}", field=key)


def _parse_points(raw: Any, where: str) -> tuple[tuple[float, float], ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise SchemaError("data must be a list of [x, y] pairs or null", field=where)
    points = []
    for idx, entry in enumerate(raw):
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise SchemaError(
                f"data[{idx}] must be a 2-element [x, y] array", field=where
            )
        pair = []
        for coord in entry:
            if isinstance(coord, bool):
                raise SchemaError(f"data[{idx}] has a non-numeric value", field=where)
            if isinstance(coord, (int, float)):
                pair.append(float(coord))
            elif isinstance(coord, str):
                try:
                    pair.append(float(coord))
                except ValueError:
                    raise SchemaError(
                        f"data[{idx}] has a non-numeric value {coord!r}", field=where
                    ) from None
            else:
                raise SchemaError(f"data[{idx}] has a non-numeric value", field=where)
        points.append((pair[0], pair[1]))
    return tuple(points)


def _parse_headers(raw: Any, where: str) -> tuple[str, str]:
    if raw is None:
        return "", ""
    if isinstance(raw, (list, tuple)):
        labels = list(raw) + ["", ""]
        x, y = labels[0], labels[1]
        x = "" if x is None else str(x)
        y = "" if y is None else str(y)
        return x, y
    raise SchemaError("headers must be a 2-element array of labels", field=where)


def _parse_pnc_property(obj: Any, index: int, diagnostics: list[str] | None) -> Curve:
    where = f"Properties[{index}]"
    if not isinstance(obj, Mapping):
        raise SchemaError("each property must be an object", field=where)
    known = {"property name": None, "headers": None, "data": None}
    for key, value in obj.items():
        ckey = _canonical_key(str(key))
        if ckey in known:
            known[ckey] = value
        elif diagnostics is None:
            raise SchemaError(f"unknown key {key!r}", field=where)
        else:
            diagnostics.append(f"{where}: dropped unknown key {key!r}")
    name = canonical_property_name(_as_optional_text(known["property name"], where))
    if name is None:
        raise SchemaError(
            f"unknown or missing property name {known['property name']!r}", field=where
        )
    x, y = _parse_headers(known["headers"], where)
    return Curve(name, x, y, _parse_points(known["data"], where))


def sample_from_dict(
    obj: Mapping[str, Any],
    domain: "str | Domain",
    *,
    diagnostics: list[str] | None = None,
) -> SampleRecord:
    """Build a :class:`SampleRecord` from a decoded JSON object.

    Strict by default: unknown keys raise :class:`SchemaError`.  Passing a
    ``diagnostics`` list switches to lenient mode, where unknown keys are
    dropped and logged into the list instead (used for raw model output).
    """
    domain = Domain.parse(domain)
    if not isinstance(obj, Mapping):
        raise SchemaError("sample must be a JSON object")
    field_keys = _PNC_FIELD_KEYS if domain is Domain.PNC else _PBD_FIELD_KEYS
    values: dict[str, str | None] = {}
    curves: list[Curve] = []
    for key, value in obj.items():
        ckey = _canonical_key(str(key))
        if ckey in field_keys:
            values[field_keys[ckey]] = _as_optional_text(value, str(key))
        elif domain is Domain.PNC and ckey == "properties":
            if value is None:
                continue
            if not isinstance(value, list):
                raise SchemaError("Properties must be a list or null", field=str(key))
            for idx, entry in enumerate(value):
                if entry is None:
                    continue
                try:
                    curves.append(_parse_pnc_property(entry, idx, diagnostics))
                except SchemaError:
                    if diagnostics is None:
                        raise
                    diagnostics.append(f"dropped malformed property #{idx}")
        elif domain is Domain.PBD and ckey == "biodegradation":
            if value is None:
                continue
            if not isinstance(value, Mapping):
                raise SchemaError(
                    "Biodegradation must be an object or null", field=str(key)
                )
            header = value.get("header", value.get("headers"))
            extra = set(map(_canonical_key, map(str, value))) - {"header", "headers", "data"}
            if extra:
                if diagnostics is None:
                    raise SchemaError(
                        f"unknown keys {sorted(extra)}", field="Biodegradation"
                    )
                diagnostics.append(f"Biodegradation: dropped unknown keys {sorted(extra)}")
            x, y = _parse_headers(header, "Biodegradation")
            curves.append(
                Curve("biodegradation", x, y, _parse_points(value.get("data"), "Biodegradation"))
            )
        elif diagnostics is None:
            raise SchemaError(f"unknown key {key!r} for {domain.value} schema", field=str(key))
        else:
            diagnostics.append(f"dropped unknown key {key!r}")
    if domain is Domain.PNC:
        composition: Composition = CompositionPNC(**values).normalized()
    else:
        composition = CompositionPBD(**values).normalized()
    return SampleRecord(composition, tuple(curves))


def parse_sample_file(raw: bytes | str, domain: "str | Domain") -> SampleRecord:
    """Parse one UTF-8 sample file into a :class:`SampleRecord`.

    Raises :class:`ParseError` (with byte offset) for malformed syntax and
    :class:`SchemaError` (naming the field) for schema mismatches.
    """
    if isinstance(raw, bytes):
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("not valid UTF-8", byte_offset=exc.start) from None
    else:
        text = raw
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise ParseError(exc.msg, byte_offset=offset) from None
    if not isinstance(obj, dict):
        raise SchemaError("top-level value must be a JSON object")
    return sample_from_dict(obj, domain)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def composition_to_dict(composition: Composition) -> dict[str, Any]:
    """Composition as a JSON-ready mapping with the documented key names."""
    titles = _PNC_TITLES if isinstance(composition, CompositionPNC) else _PBD_TITLES
    return {titles[f.name]: getattr(composition, f.name) for f in fields(composition)}


def sample_to_dict(record: SampleRecord) -> dict[str, Any]:
    out = composition_to_dict(record.composition)
    if record.domain is Domain.PNC:
        out["Properties"] = [
            {
                "property name": c.property_name,
                "headers": [c.x_header, c.y_header],
                "data": [list(p) for p in c.points] or None,
            }
            for c in record.properties
        ]
    else:
        curve = record.properties[0] if record.properties else None
        out["Biodegradation"] = (
            {
                "header": [curve.x_header, curve.y_header],
                "data": [list(p) for p in curve.points] or None,
            }
            if curve is not None
            else None
        )
    return out


def serialize_sample(record: SampleRecord) -> str:
    return json.dumps(sample_to_dict(record), indent=4, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


def validate_paper(record: PaperRecord) -> list[Violation]:
    """Check a paper against the data invariants.

    Violations are data, not failures: the list is empty for a valid paper
    and the input is never mutated.
    """
    out: list[Violation] = []
    if not record.paper_id.strip():
        out.append(Violation("paper_id", "empty paper id"))
    expected = CompositionPNC if record.domain is Domain.PNC else CompositionPBD
    for i, sample in enumerate(record.samples):
        loc = f"samples[{i}]"
        comp = sample.composition
        if not isinstance(comp, expected):
            out.append(
                Violation(loc, f"composition schema does not match domain {record.domain.value}")
            )
            continue
        for name, value in comp.present_fields().items():
            if not value.strip():
                out.append(Violation(f"{loc}.{name}", "blank value should be absent"))
            elif value != value.strip():
                out.append(Violation(f"{loc}.{name}", "value is not trimmed"))
        if isinstance(comp, CompositionPNC):
            for name in CompositionPNC._PERCENT_FIELDS:
                value = getattr(comp, name)
                if value is not None and not value.endswith("%"):
                    out.append(Violation(f"{loc}.{name}", "missing trailing '%'"))
        bio_curves = 0
        for j, curve in enumerate(sample.properties):
            cloc = f"{loc}.properties[{j}]"
            if record.domain is Domain.PNC and curve.property_name not in PNC_PROPERTY_NAMES:
                out.append(
                    Violation(cloc, f"{curve.property_name!r} curve not valid for a pnc sample")
                )
            if record.domain is Domain.PBD:
                if curve.property_name != "biodegradation":
                    out.append(
                        Violation(cloc, f"{curve.property_name!r} curve not valid for a pbd sample")
                    )
                else:
                    bio_curves += 1
            for k, (x, y) in enumerate(curve.points):
                if not (math.isfinite(x) and math.isfinite(y)):
                    out.append(Violation(cloc, f"non-finite point at index {k}"))
                    break
        if bio_curves > 1:
            out.append(Violation(loc, f"{bio_curves} biodegradation curves; at most one allowed"))
    return out


# ---------------------------------------------------------------------------
# Corpus layout: <root>/<paper_id>/sample_*.json
# ---------------------------------------------------------------------------

def load_paper_dir(path: Path, domain: "str | Domain", paper_id: str | None = None) -> PaperRecord:
    path = Path(path)
    if not path.is_dir():
        raise DataError(f"paper directory not found: {path}")
    samples = []
    for sample_path in sorted(path.glob("sample_*.json")):
        try:
            samples.append(parse_sample_file(sample_path.read_bytes(), domain))
        except DataError as exc:
            raise DataError(f"{sample_path}: {exc}") from exc
    return PaperRecord(paper_id or path.name, Domain.parse(domain), tuple(samples))


def load_corpus(root: Path, domain: "str | Domain") -> list[PaperRecord]:
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"corpus root not found: {root}")
    papers = [load_paper_dir(p, domain) for p in sorted(root.iterdir()) if p.is_dir()]
    seen: set[str] = set()
    for paper in papers:
        if paper.paper_id in seen:
            raise DataError(f"duplicate paper id {paper.paper_id!r} in corpus")
        seen.add(paper.paper_id)
    return papers


def write_paper_dir(record: PaperRecord, root: Path) -> Path:
    out_dir = Path(root) / record.paper_id
    out_dir.mkdir(parents=True, exist_ok=True)
    for existing in out_dir.glob("sample_*.json"):
        existing.unlink()
    for i, sample in enumerate(record.samples, 1):
        (out_dir / f"sample_{i:03d}.json").write_text(
            serialize_sample(sample), encoding="utf-8"
        )
    return out_dir


_IMAGE_EXTENSIONS = {
    ".png": "image/png",
    ".jpg": "image/jpeg",
    ".jpeg": "image/jpeg",
    ".gif": "image/gif",
    ".bmp": "image/bmp",
    ".webp": "image/webp",
}


def load_document_dir(path: Path, paper_id: str | None = None) -> DocumentBundle:
    """Load one article directory: a single ``*.tex`` file plus its images."""
    path = Path(path)
    tex_files = sorted(path.glob("*.tex"))
    if not tex_files:
        raise DataError(f"no .tex file in document directory {path}")
    if len(tex_files) > 1:
        main = path / "main.tex"
        if main in tex_files:
            tex_files = [main]
        else:
            raise DataError(f"multiple .tex files in {path}; keep one (or name it main.tex)")
    images = tuple(
        DocumentImage(p.name, p.read_bytes(), _IMAGE_EXTENSIONS[p.suffix.lower()])
        for p in sorted(path.iterdir())
        if p.is_file() and p.suffix.lower() in _IMAGE_EXTENSIONS
    )
    return DocumentBundle(
        paper_id or path.name,
        tex_files[0].read_text(encoding="utf-8"),
        images,
    )


def load_document_corpus(root: Path) -> list[DocumentBundle]:
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"document root not found: {root}")
    return [load_document_dir(p) for p in sorted(root.iterdir()) if p.is_dir()]
