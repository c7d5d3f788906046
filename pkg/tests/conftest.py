import numpy as np
import pytest

from radarloc.config import ImuParams
from radarloc.rio.state import STATE_DIM, State
from radarloc.sim.imu import ImuMeasurement


def numeric_state_jacobian(func, x: State, rows: int, h: float = 1e-6) -> np.ndarray:
    """Central finite differences of a residual through the state retraction."""
    J = np.zeros((rows, STATE_DIM))
    for i in range(STATE_DIM):
        d = np.zeros(STATE_DIM)
        d[i] = h
        rp = np.atleast_1d(func(x.retract(d)))
        rm = np.atleast_1d(func(x.retract(-d)))
        J[:, i] = (rp - rm) / (2.0 * h)
    return J


def jacobian_close(J_analytic: np.ndarray, J_numeric: np.ndarray, rel: float = 1e-5) -> bool:
    scale = max(float(np.linalg.norm(J_numeric)), 1e-6)
    return float(np.linalg.norm(J_analytic - J_numeric)) / scale < rel


def random_state(rng: np.random.Generator, t: float = 0.0) -> State:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    if q[0] < 0.0:
        q = -q
    return State(
        t=t,
        q=q,
        v=rng.normal(scale=2.0, size=3),
        ba=rng.normal(scale=0.05, size=3),
        bg=rng.normal(scale=0.01, size=3),
    )


def random_imu_segment(rng: np.random.Generator, duration: float = 0.05, rate: float = 200.0):
    n = max(int(round(duration * rate)), 1) + 1
    t = np.arange(n) / rate
    samples = [
        ImuMeasurement(
            float(ti),
            np.array([0.0, 0.0, 9.81]) + rng.normal(scale=0.5, size=3),
            rng.normal(scale=0.3, size=3),
        )
        for ti in t
    ]
    return samples


@pytest.fixture
def imu_params() -> ImuParams:
    return ImuParams()
