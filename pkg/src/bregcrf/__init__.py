"""Linear-chain CRF sequence labeling with transformed-gradient training."""

from .chain_crf import (
    ChainModel,
    Lattice,
    Posteriors,
    build_lattice,
    expected_features,
    forward_backward,
    log_likelihood,
    stochastic_gradient,
    viterbi,
)
from .corpus import (
    CorpusStats,
    Dataset,
    ParseError,
    Sentence,
    Token,
    load_conll,
    parse_conll,
    serialize,
    shuffle,
    stats,
)
from .evaluation import Chunk, ChunkMetrics, extract_chunks, score, token_accuracy
from .features import (
    EncodedSentence,
    FeatureIndex,
    SparseVector,
    TemplateSet,
    build_dictionary,
    encode_sentence,
    extract_attributes,
    global_feature_vector,
)
from .model_io import ModelFormatError, export_text, load_model, save_model
from .trainer import (
    CalibrationError,
    EpochRecord,
    MetricsLog,
    StepSizeError,
    TrainConfig,
    TrainState,
    calibrate,
    evaluate_model,
    learning_rate,
    sparse_scaled_step,
    train,
    update_step,
)
from .transforms import Transform, TransformSpec, build_table, make_transform

__version__ = "0.1.0"
