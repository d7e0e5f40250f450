"""Decade-scale lexical dynamics toolkit for Google Books Ngram 1-gram data.

Ingests raw shard and totals files, coarse-grains word usage into
decade-mean relative frequencies, and measures how the lexicon moves:
divergence between decades with its per-word decomposition, word flux across
fixed frequency thresholds, rank/frequency stability, and window-dependent
word birth/death rates. Synthetic scripted corpora provide exact ground
truth for all of it.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from .corpus import (
    Decade,
    DecadeTable,
    NormalizedDecadeDistribution,
    build_decade_table,
    build_decade_table_from_shards,
    decade_span,
    export_tsv,
    load_table,
    normalize,
    save_table,
)
from .divergence import (
    Contribution,
    DivergenceReport,
    contribution_fraction,
    contribution_report,
    jsd,
    rising_fraction_series,
    shannon_entropy,
    word_contribution,
)
from .flux import (
    FluxReport,
    ThresholdCrossing,
    count_above,
    flux_volume_series,
    rank_threshold_frequency,
    threshold_flux,
)
from .ingest import (
    CorpusTotals,
    IngestStats,
    TokenFilter,
    YearRecord,
    format_line,
    parse_line,
    parse_totals,
    stream_records,
)
from .lifecycle import (
    LifecycleConfig,
    LifecycleResult,
    birth_death,
    boundary_experiment,
    median_frequency,
)
from .synth import (
    ScriptedWord,
    TrajectoryScript,
    generate,
    load_script,
    oracle_flux,
    oracle_jsd,
    parse_script,
    write_corpus,
)

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    "Decade",
    "DecadeTable",
    "NormalizedDecadeDistribution",
    "build_decade_table",
    "build_decade_table_from_shards",
    "decade_span",
    "export_tsv",
    "load_table",
    "normalize",
    "save_table",
    "Contribution",
    "DivergenceReport",
    "contribution_fraction",
    "contribution_report",
    "jsd",
    "rising_fraction_series",
    "shannon_entropy",
    "word_contribution",
    "FluxReport",
    "ThresholdCrossing",
    "count_above",
    "flux_volume_series",
    "rank_threshold_frequency",
    "threshold_flux",
    "CorpusTotals",
    "IngestStats",
    "TokenFilter",
    "YearRecord",
    "format_line",
    "parse_line",
    "parse_totals",
    "stream_records",
    "LifecycleConfig",
    "LifecycleResult",
    "birth_death",
    "boundary_experiment",
    "median_frequency",
    "ScriptedWord",
    "TrajectoryScript",
    "generate",
    "load_script",
    "oracle_flux",
    "oracle_jsd",
    "parse_script",
    "write_corpus",
]
