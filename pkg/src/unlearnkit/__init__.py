"""Machine unlearning on small dense networks.

Fine-tuning, gradient ascent, forgetting-gradient corrected fine-tuning (with
and without an easy-to-hard curriculum) and the Retrain reference, plus the
UA/RA/TA/MIA/runtime evaluation and an experiment harness.
"""

from .curriculum import CurriculumPlan, DifficultyScores, build_plan, difficulty_scores, validate_plan
from .data import ForgetSplit, LabeledDataset, load_csv, make_blobs, split_classwise, split_random
from .evaluation import MetricsReport, GapReport, accuracy, avg_gap, compute_ua, mia_score
from .nncore import MlpArchitecture, apply_update, forward, init_params, loss_and_grad, predict_proba
from .train import TrainHyper, retrain, train_erm
from .unlearn import (
    UnlearnConfig,
    UnlearnTrace,
    correct_gradient,
    forgetting_mean_gradient,
    gradient_angle,
    unlearn_cufg,
    unlearn_ft,
    unlearn_ga,
    unlearn_ufg,
)

__version__ = "0.1.0"
