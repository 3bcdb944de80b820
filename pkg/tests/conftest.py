import numpy as np
import pytest

from hebbfuse.feature_store import read_feature_set
from hebbfuse.toy_backbone import (
    ConceptShift,
    CovariateShift,
    PriorShift,
    SyntheticSpec,
    generate_domain_suite,
)

# Frozen fixture parameters; the acceptance regression CSV was recorded
# with exactly these values, so changing them invalidates tests/data.
FIXTURE = dict(
    classes=10,
    input_dim=16,
    samples_per_class=120,
    cluster_spread=0.45,
    seed=7,
)
TRAIN_SEED = 11
EPOCHS = 150
LR = 0.1
PRIOR_WEIGHTS = (0.55,) + (0.05,) * 9
COVARIATE = dict(rotation_deg=90.0, translation=1.5, scale=1.6)
CONCEPT_FLIP = 0.2


@pytest.fixture(scope="session")
def domain_suite(tmp_path_factory):
    """Backbone + exported feature directories for all four toy domains."""
    out = tmp_path_factory.mktemp("domains")
    base = SyntheticSpec(**FIXTURE)
    domains = {
        "source": None,
        "prior": PriorShift(class_weights=PRIOR_WEIGHTS),
        "covariate": CovariateShift(**COVARIATE),
        "concept": ConceptShift(label_flip_fraction=CONCEPT_FLIP),
    }
    bb, manifests = generate_domain_suite(
        out, base, domains, train_seed=TRAIN_SEED, epochs=EPOCHS, lr=LR
    )
    return bb, manifests


@pytest.fixture(scope="session")
def source_fs(domain_suite):
    _, manifests = domain_suite
    return read_feature_set(manifests["source"])


@pytest.fixture(scope="session")
def covariate_fs(domain_suite):
    _, manifests = domain_suite
    return read_feature_set(manifests["covariate"])


@pytest.fixture()
def rng():
    return np.random.default_rng(20240901)
