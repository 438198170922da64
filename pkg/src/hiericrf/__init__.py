"""Few-shot hierarchical text classification via a chain CRF over iterated per-level mask slots."""

__version__ = "0.1.0"

from .chain import ChainSchedule, build_schedule, golden_sequence, render_template
from .emission import (
    EmissionMatrix,
    FeatureVector,
    VerbalizerParams,
    emit,
    hash_features,
    init_verbalizer,
    load_emissions,
    store_emissions,
)
from .fewshot import Example, SupportSet, greedy_sample, read_corpus, write_corpus
from .icrf import (
    FAITHFUL,
    STRICT,
    CrfParams,
    DecodeResult,
    argmax_decode,
    decode,
    init_transitions,
    log_partition,
    nll_and_grads,
    posterior_marginals,
    sequence_score,
)
from .metrics import MetricsReport, evaluate, evaluate_names
from .synthgen import SynthSpec, generate, write_dataset
from .taxonomy import Taxonomy, LabelNode, load_taxonomy, legal_level_pairs
from .training import (
    FileEmitter,
    SurrogateEmitter,
    TrainConfig,
    fit,
    load_model,
    save_model,
)

__all__ = [
    "ChainSchedule",
    "CrfParams",
    "DecodeResult",
    "EmissionMatrix",
    "Example",
    "FAITHFUL",
    "FeatureVector",
    "FileEmitter",
    "LabelNode",
    "MetricsReport",
    "STRICT",
    "SupportSet",
    "SurrogateEmitter",
    "SynthSpec",
    "Taxonomy",
    "TrainConfig",
    "VerbalizerParams",
    "argmax_decode",
    "build_schedule",
    "decode",
    "emit",
    "evaluate",
    "evaluate_names",
    "fit",
    "generate",
    "golden_sequence",
    "greedy_sample",
    "hash_features",
    "init_transitions",
    "init_verbalizer",
    "legal_level_pairs",
    "load_emissions",
    "load_model",
    "load_taxonomy",
    "log_partition",
    "nll_and_grads",
    "posterior_marginals",
    "read_corpus",
    "render_template",
    "save_model",
    "sequence_score",
    "store_emissions",
    "write_corpus",
    "write_dataset",
    "__version__",
]
