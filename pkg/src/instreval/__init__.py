"""Objective evaluation toolkit for sample-based instrument embeddings.

Metrics (Frechet distance, timbral consistency, paired cosine scores,
prompt-adherence scoring), ground statistics accumulation, reference
synthesis, conditioning-pair simulation, and deterministic synthetic
populations, over a fixed 440-cell pitch/velocity grid.
"""

from .conditioning import (
    apply_metadata_dropout,
    ConditioningExample,
    default_fixed_table,
    emit_pairs,
    FixedPitchTable,
    normalize_family,
    pair_baseline,
    pair_fixed,
    pair_random,
    write_pairs,
)
from .errors import (
    InstrevalError,
    NotPositiveSemidefiniteError,
    NumericalError,
    RankDeficiencyError,
    ValidationError,
)
from .grid import GRID_CELLS, grid_index, key_at, PITCH_MAX, PITCH_MIN, SampleKey, VELOCITIES
from .linalg import color_to_target, cosine_gram, psd_sqrt, sym_eigen, trace_sqrt_product
from .metrics import build_ground_stats, clap_score, fad, MetricReport, moments, tc
from .refsynth import (
    estimate_pitch_velocity,
    load_prompt,
    PromptEmbedding,
    synth_reference,
    t2i_score,
)
from .rng import derive_stream, SplitMix64
from .store import (
    CosineGrid,
    DatasetIndex,
    EmbeddingSet,
    InstrumentInfo,
    load_population,
    load_stats,
    MeanGrid,
    save_population,
    save_stats,
    synth_population,
    SynthSpec,
)

__version__ = "0.1.0"

__all__ = [
    "apply_metadata_dropout",
    "build_ground_stats",
    "clap_score",
    "color_to_target",
    "ConditioningExample",
    "cosine_gram",
    "CosineGrid",
    "DatasetIndex",
    "default_fixed_table",
    "derive_stream",
    "EmbeddingSet",
    "emit_pairs",
    "estimate_pitch_velocity",
    "fad",
    "FixedPitchTable",
    "GRID_CELLS",
    "grid_index",
    "InstrevalError",
    "InstrumentInfo",
    "key_at",
    "load_population",
    "load_prompt",
    "load_stats",
    "MeanGrid",
    "MetricReport",
    "moments",
    "normalize_family",
    "NotPositiveSemidefiniteError",
    "NumericalError",
    "pair_baseline",
    "pair_fixed",
    "pair_random",
    "PITCH_MAX",
    "PITCH_MIN",
    "PromptEmbedding",
    "psd_sqrt",
    "RankDeficiencyError",
    "SampleKey",
    "save_population",
    "save_stats",
    "SplitMix64",
    "sym_eigen",
    "synth_population",
    "synth_reference",
    "SynthSpec",
    "t2i_score",
    "tc",
    "trace_sqrt_product",
    "ValidationError",
    "VELOCITIES",
    "write_pairs",
]
