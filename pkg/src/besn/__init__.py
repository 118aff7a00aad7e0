"""Bidirectional echo state network classifier for keypoint sequences.

A fixed random reservoir is run over each input sequence and over its time
reversal; the two trajectories are pooled and concatenated into one feature
vector per sequence, and a closed-form ridge readout maps features to class
labels. Only the readout is trained, so training is a single linear solve.
"""

from .bidirectional import (
    AGGREGATION_MODES,
    BiStates,
    aggregate,
    aggregate_unidirectional,
    backward_weights_for,
    reverse_sequence,
    run_bidirectional,
)
from .config import ConfigError, ReservoirConfig
from .dataset import (
    DatasetError,
    KeypointSequence,
    LoadedDataset,
    Manifest,
    SyntheticSpec,
    clean_sequence,
    generate_synthetic,
    load_dataset,
    load_manifest,
    read_sample,
    write_dataset,
    write_sample,
)
from .model_io import ModelFormatError, load_pipeline, save_pipeline
from .pipeline import (
    RunConfig,
    StateFeaturizer,
    TrainedPipeline,
    benchmark_directions,
    evaluate_pipeline,
    format_accuracy_sd,
    multi_seed_run,
    train_pipeline,
)
from .readout import (
    EvalReport,
    NumericalError,
    ReadoutModel,
    evaluate,
    fit_ridge,
    predict,
    ridge_solve,
)
from .reservoir import (
    ReservoirWeights,
    estimate_spectral_radius,
    init_weights,
    run_forward,
    step,
)

__version__ = "0.1.0"
