"""Bootstrap a text-to-SQL semantic parser with zero annotated examples.

A compact synchronous grammar expands into canonical (utterance, SQL) pairs;
paraphrase providers diversify the utterances; a self-training filter keeps
paraphrases the parser already understands; SQL-aware metrics score the
result. Everything runs deterministically with the builtin provider and
template parser, and external neural components attach over simple
newline-delimited wire protocols.
"""

from .backend import (
    BackendError,
    RemoteBackend,
    TemplateParserBackend,
    TemplateParserConfig,
    TemplateParserModel,
    check_backend_conformance,
    train_template_parser,
)
from .filtering import (
    FilterResult,
    FilterRoundReport,
    render_filter_table,
    run_filter,
    verify_kept,
)
from .grammar import (
    CanonicalPair,
    Grammar,
    GrammarError,
    SynchronousRule,
    abstract_template,
    count_expansions,
    expand,
    load_grammar,
    parse_grammar,
)
from .lexicon import (
    Lexicon,
    LexiconError,
    SchemaManifest,
    VariableDef,
    load_lexicon,
    load_schema,
    parse_lexicon,
    parse_schema,
    serialize_lexicon,
)
from .metrics import (
    DiversityReport,
    EvalReport,
    corpus_bleu,
    diversity_report,
    evaluate,
)
from .paraphrase import (
    ParaphraseCandidate,
    builtin_paraphrase,
    check_provider_conformance,
    paraphrase_batch,
    repair_variables,
    run_providers,
)
from .pipeline import PipelineConfig, load_config, parse_config, run_pipeline
from .sampling import SamplingReport, sample_uat, sampling_report
from .sqlmodel import SqlParseError, SqlQuery, equal_exact, equal_no_order, parse_sql
from .wire import ProviderSpec, TransportError, parse_provider_flag

__version__ = "0.1.0"

__all__ = [
    "BackendError",
    "CanonicalPair",
    "DiversityReport",
    "EvalReport",
    "FilterResult",
    "FilterRoundReport",
    "Grammar",
    "GrammarError",
    "Lexicon",
    "LexiconError",
    "ParaphraseCandidate",
    "PipelineConfig",
    "ProviderSpec",
    "RemoteBackend",
    "SamplingReport",
    "SchemaManifest",
    "SqlParseError",
    "SqlQuery",
    "SynchronousRule",
    "TemplateParserBackend",
    "TemplateParserConfig",
    "TemplateParserModel",
    "TransportError",
    "VariableDef",
    "abstract_template",
    "builtin_paraphrase",
    "check_backend_conformance",
    "check_provider_conformance",
    "corpus_bleu",
    "count_expansions",
    "diversity_report",
    "equal_exact",
    "equal_no_order",
    "evaluate",
    "expand",
    "load_config",
    "load_grammar",
    "load_lexicon",
    "load_schema",
    "parse_config",
    "parse_grammar",
    "parse_lexicon",
    "parse_provider_flag",
    "parse_schema",
    "parse_sql",
    "paraphrase_batch",
    "render_filter_table",
    "repair_variables",
    "run_filter",
    "run_pipeline",
    "run_providers",
    "sample_uat",
    "sampling_report",
    "serialize_lexicon",
    "train_template_parser",
    "verify_kept",
]
