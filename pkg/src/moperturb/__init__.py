"""Physics-constrained adversarial perturbations for skeleton motion predictors.

The package splits into the sequence data model and metrics (`core`),
differentiable baseline predictors (`predict`), the constrained sign-gradient
attack (`attack`), synthetic data and file formats (`synth`), table rendering
(`report`), and the command-line front end (`cli`).
"""

__version__ = "0.1.0"

from .attack import (
    AttackConfig,
    AttackResult,
    DegenerateScaleError,
    HistoryPartition,
    NumericFailureError,
    adaptive_scale,
    attack_batch,
    bone_length_loss,
    clip_perturbation,
    partition_history,
    pgd_attack,
    prediction_loss,
    temporal_loss,
    total_loss,
)
from .core import (
    Connectivity,
    MotionSequence,
    SplitSequence,
    asr,
    bone_lengths,
    growth_rate,
    interval_to_frame,
    mpjpe,
    mpjpe_at_intervals,
    mpjpe_curve,
    temporal_derivative,
)
from .predict import (
    LinearExtrapolationPredictor,
    MlpParams,
    MlpPredictor,
    Predictor,
    ZeroVelocityPredictor,
    central_difference_gradient,
    finite_diff_gradient,
    load_predictor,
    save_predictor,
    train_mlp,
)
from .report import (
    per_joint_stats,
    physical_change_metrics,
    robustness_table,
    frame_vulnerability_table,
)
from .synth import Dataset, DatasetFormatError, SynthConfig, generate, read_dataset, write_dataset
