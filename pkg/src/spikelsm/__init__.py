"""Liquid state machine: a fixed sparse spiking reservoir with a trained linear readout."""

from ._backend import kernels as _kernels
from .bench import gen_delay_task, memory_capacity_profile, nmse, run_benchmark
from .config import NeuronParams, ReservoirConfig, default_config
from .errors import (
    ConfigError,
    CorruptFileError,
    CsvParseError,
    DimensionError,
    FormatError,
    LsmError,
    MissingCacheError,
    NotTrainedError,
    NumericError,
    RankDeficiencyError,
    ShapeError,
    UnsupportedVersionError,
)
from .persistence import export_csv, import_csv, load_model, save_model
from .pipeline import (
    LsmModel,
    StreamSession,
    open_session,
    predict_sequence,
    reset_session,
    retrain,
    stream_step,
    train,
)
from .readout import (
    FeatureMode,
    ReadoutModel,
    StateCache,
    StateTrace,
    extract_features,
    fit_readout,
    predict,
    retrain_from_cache,
)
from .reservoir import (
    Reservoir,
    ReservoirState,
    dense_reference_step,
    generate_reservoir,
    neuron_update,
    reservoir_step,
    run_sequence,
    step_counter,
)
from .sparse import SparseBinaryMatrix, SparseRealMatrix

BACKEND = _kernels.NAME

__version__ = "0.1.0"
