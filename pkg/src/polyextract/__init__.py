"""Evaluation and extraction toolkit for structured polymer-sample records.

The package scores predicted hierarchical sample records (compositions
plus property curves) against ground truth, builds a majority-vote
property baseline, and orchestrates a three-stage model pipeline that
produces such records from article text and figures.
"""

from .assignment import Assignment, optimal_assignment
from .baseline import (
    BaselineEntry,
    BaselineProfile,
    build_profile,
    expand_with_baseline,
    load_profile,
    profile_from_json,
    profile_to_json,
    round_count,
    save_profile,
)
from .clients import (
    HttpModelClient,
    ModelClient,
    RetryPolicy,
    ScriptedClient,
    load_clients_config,
    load_transcript,
    request_key,
)
from .config import DEFAULT_CONFIG, EvalConfig
from .errors import (
    ContractViolation,
    DataError,
    ParseError,
    SchemaError,
    UpstreamError,
    UsageError,
)
from .metrics import (
    ScoreBreakdown,
    curve_norm,
    curve_similarity,
    discrete_frechet,
    header_distance,
    join_headers,
    levenshtein,
    normalized_frechet,
    normalized_levenshtein,
    pearson,
    permutation_pvalue,
    spearman,
)
from .model import (
    CompositionPBD,
    CompositionPNC,
    Curve,
    DocumentBundle,
    DocumentImage,
    Domain,
    PaperRecord,
    PNC_PROPERTY_NAMES,
    PROPERTY_NAMES,
    SampleRecord,
    Violation,
    load_corpus,
    load_document_corpus,
    load_document_dir,
    load_paper_dir,
    normalize_field,
    normalize_label,
    parse_sample_file,
    sample_from_dict,
    sample_to_dict,
    serialize_sample,
    validate_paper,
    write_paper_dir,
)
from .pipeline import (
    PipelineClients,
    PipelineConfig,
    expand_with_image,
    extract_text_samples,
    merge,
    parse_model_samples,
    recover_json_values,
    run_pipeline,
    substitute_figures,
)
from .scoring import (
    CorpusReport,
    CurveAlignment,
    PairCounts,
    PaperScore,
    SampleAlignment,
    align_curves,
    align_samples,
    aggregate,
    composition_pair_score,
    curve_alignment_score,
    curve_auto_score,
    header_auto_score,
    render_report,
    report_to_csv,
    report_to_json,
    score_corpus,
    score_paper,
)

__version__ = "0.1.0"
