import numpy as np
import pytest

from src.type import HermiteInput


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def figure_input():
    return HermiteInput(
        p_i=[0.0, 0.0, 0.0],
        p_f=[1.0, 1.0, 1.0],
        v_i=[1.0, 0.0, 1.0],
        v_f=[0.0, 1.0, 1.0],
        w_i=[-0.1, 0.5, -1.5],
    )


def random_hermite_input(rng: np.random.Generator, u_i: float = 0.0, u_f: float = 1.0) -> HermiteInput:
    """端点の微分が小さすぎない乱数 Hermite データ。"""
    def vector(minimum: float) -> np.ndarray:
        while True:
            v = rng.normal(size=3)
            if np.linalg.norm(v) > minimum:
                return v

    return HermiteInput(
        p_i=rng.normal(size=3),
        p_f=rng.normal(size=3) + vector(0.5),
        v_i=vector(0.3),
        v_f=vector(0.3),
        w_i=rng.normal(size=3),
        u_i=u_i,
        u_f=u_f,
    )


@pytest.fixture
def random_inputs(rng):
    return [random_hermite_input(rng) for _ in range(200)]
