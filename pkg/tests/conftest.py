import numpy as np
import pytest

from autoreg.core.estimation import SignalPair, build_stats
from autoreg.core.wiener import to_eigen_domain
from autoreg.models import ARConfig
from autoreg.services.experiments import ScenarioConfig, simulate, synth_impulse


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_signal(rng, N, L, snr_db=20.0, a=None):
    """AR(1) input through a random length-L system plus white noise."""
    a = rng.uniform(0.0, 0.9) if a is None else a
    u = rng.standard_normal(N + L - 1 + 50)
    x = np.empty_like(u)
    x[0] = u[0]
    for t in range(1, u.size):
        x[t] = a * x[t - 1] + u[t]
    x = x[50:]
    h = rng.standard_normal(L) * np.exp(-np.arange(L) / max(L / 4.0, 1.0))
    windows = np.lib.stride_tricks.sliding_window_view(x, L)[:, ::-1]
    clean = windows @ h
    noise = rng.standard_normal(N) * np.sqrt(np.var(clean) / 10 ** (snr_db / 10))
    return SignalPair(x_pre=x[:L - 1], x=x[L - 1:], d=clean + noise), h


@pytest.fixture
def make_signal(rng):
    def factory(N, L, snr_db=20.0, a=None):
        return random_signal(rng, N, L, snr_db=snr_db, a=a)
    return factory


@pytest.fixture
def make_eigen(make_signal):
    def factory(N, L, snr_db=20.0, a=None):
        sig, _ = make_signal(N, L, snr_db=snr_db, a=a)
        stats = build_stats(sig)
        return sig, stats, to_eigen_domain(stats)
    return factory


def matched_scenario(N=1024, L_star=32, snr_db=20.0, seed=0, realizations=1, **kw):
    impulse = synth_impulse(L_star, L_star / 4.0, seed=99)
    return ScenarioConfig(N=N, L=kw.pop("L", L_star), impulse=impulse, snr_db=snr_db,
                          realizations=realizations, seed=seed, ar=ARConfig(a=0.9), **kw)


@pytest.fixture
def matched_eigen():
    def factory(index=0, **kw):
        scn = matched_scenario(**kw)
        sig = simulate(scn, index)
        return scn, to_eigen_domain(build_stats(sig))
    return factory
