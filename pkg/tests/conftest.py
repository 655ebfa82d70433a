import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from twistchain import ChainParams, SpectralContext, TwistParams

settings.register_profile(
    "desk",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("desk")


def random_twist(rng, diagonal: bool = False) -> TwistParams:
    """Generic non-degenerate twist; retries the rare near-degenerate draw."""
    while True:
        vals = rng.uniform(0.5, 2.0, 4) + 1j * rng.uniform(-0.3, 0.3, 4)
        if diagonal:
            vals[2] = vals[3] = 0.0
        tw = TwistParams(*vals)
        disc = (tw.kappa - tw.kappa_tilde) ** 2 + 4 * tw.kappa_plus * tw.kappa_minus
        if abs(disc) > 0.05 and abs(tw.gamma) > 0.05:
            return tw


def random_theta(rng, sites: int):
    return tuple(rng.uniform(-0.3, 0.3, sites) + 1j * rng.uniform(-0.1, 0.1, sites))


def random_context(rng, sites: int, diagonal: bool = False) -> SpectralContext:
    chain = ChainParams(sites=sites, c=1.0, theta=random_theta(rng, sites))
    return SpectralContext.create(chain, random_twist(rng, diagonal))


def draw_points(rng, count: int, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.standard_normal(count) + 1j * rng.standard_normal(count))


@pytest.fixture(scope="session")
def config_a() -> SpectralContext:
    """One site, c=1, homogeneous, twist (2,1,1,1): everything quadratic."""
    chain = ChainParams(sites=1, c=1.0, theta=(0.0,))
    return SpectralContext.create(chain, TwistParams(2.0, 1.0, 1.0, 1.0))
