import numpy as np
import pytest

from chansmooth import ChannelParams, random_pair, random_prior


def seeded_pairs(seed, count, a=1.0, max_atoms=4, log10_scale=(-3.0, -1.0)):
    """Reproducible (prior, perturbation) pairs."""
    rng = np.random.default_rng(seed)
    return [random_pair(rng, a, max_atoms, log10_scale) for _ in range(count)]


def seeded_independent_pairs(seed, count, a=1.0, max_atoms=4):
    """Reproducible pairs of independently drawn priors."""
    rng = np.random.default_rng(seed)
    return [(random_prior(rng, a, max_atoms), random_prior(rng, a, max_atoms)) for _ in range(count)]


@pytest.fixture
def unit_params():
    return ChannelParams(a=1.0, sigma=1.0, gamma=1.0)
