import pytest

from lrwave import MediumSpec, build_medium, constant_profile


@pytest.fixture(scope="session")
def gaussian_lr_ensemble():
    """Shared constant-decay Gaussian medium ensemble (gamma=0.8, K=1).

    Large because covariance products of long-memory fields need thousands
    of realizations for conclusive assumption checks.
    """
    return [build_medium(MediumSpec(epsilon=0.1,
                                    gamma_profile=constant_profile(0.8),
                                    seed=(1700, i)))
            for i in range(3000)]
