"""Few-shot evaluation toolkit over stored per-layer features.

Train-free backbones export activations through a small binary format;
per-layer heads (Hebbian, k-NN, ridge) are fitted on episode support
sets and fused by summed scores; batches of seeded episodes aggregate
into accuracy reports; the Frechet distance quantifies the shift between
feature populations.
"""

from .baselines import KnnConfig, RidgeConfig, knn_predict, learner_for, ridge_fit
from .episodes import Episode, EpisodeSpec, episode_stream, sample_episode
from .errors import ConfigError, DataError, NumericalError, ToolkitError
from .feature_store import (
    FeatureSet,
    Manifest,
    read_feature_set,
    select_layers,
    write_feature_set,
)
from .fid import GaussianStats, fid_between_sets, fit_gaussian, frechet_distance
from .harness import EvalReport, RunConfig, run_ablation, run_eval, run_fid
from .hebbian import (
    EnsembleModel,
    HebbianConfig,
    HebbianHead,
    accuracy,
    fit_ensemble,
    hebb_rule,
    predict,
)
from .linalg import SymEigen, ce_grad_wrt_logits, softmax_rows, sym_eigen, sym_sqrt
from .toy_backbone import (
    ConceptShift,
    CovariateShift,
    MlpBackbone,
    PriorShift,
    SyntheticSpec,
    export_features,
    gen_synthetic,
    train_backbone,
)

__version__ = "0.1.0"
