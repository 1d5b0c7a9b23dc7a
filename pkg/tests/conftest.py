import numpy as np
import pytest

from asymscat.profiles import GaussianTerm, RabiProfile


def random_profile(rng, n_terms=None, amp_scale=30.0, open_channel_kbar=None):
    """Random Gaussian-sum profile with zero decay.

    If open_channel_kbar is given, the detuning is restricted so the excited
    channel is open at that kbar (kbar^2 + 8*tau_delta > 0).
    """
    n = int(rng.integers(1, 4)) if n_terms is None else n_terms
    terms = tuple(
        GaussianTerm(
            weight_tau=complex(
                rng.uniform(-amp_scale, amp_scale), rng.uniform(-amp_scale, amp_scale)
            ),
            center_over_d=float(rng.uniform(-0.5, 0.5)),
            width_over_d=float(rng.uniform(0.08, 0.3)),
        )
        for _ in range(n)
    )
    if open_channel_kbar is not None:
        lo = -0.9 * open_channel_kbar**2 / 8.0
        tau_delta = float(rng.uniform(lo, 40.0))
    else:
        tau_delta = float(rng.uniform(-5.0, 40.0))
    return RabiProfile(terms=terms, tau_delta=tau_delta, tau_gamma=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
