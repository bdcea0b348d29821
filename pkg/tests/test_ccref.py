import numpy as np
import pytest

from src import quaternion as quat
from src.ccref import CCObjective, cc_arc, cc_interpolant, cc_select, solve_first_order, split_to_biarc
from src.errors import DegenerateInputError
from src.phcore import de_casteljau, derivative, evaluate, make_arc
from src.type import PreImage

P_I = np.array([0.0, 0.0, 0.0])
P_F = np.array([1.0, 1.0, 1.0])
D_I = np.array([2.0, 0.0, 2.0])
D_F = np.array([0.0, 2.0, 2.0])


def test_first_order_interpolation():
    scale = max(np.linalg.norm(P_F - P_I), np.linalg.norm(D_I), np.linalg.norm(D_F))
    for phi0, phi2 in [(0.0, 0.0), (1.0, 2.0), (4.0, 5.5)]:
        arc = make_arc(solve_first_order(P_I, P_F, D_I, D_F, phi0, phi2), P_I, 0.0, 1.0)
        assert np.linalg.norm(evaluate(arc, 1.0) - P_F) <= 1e-10 * scale
        assert np.linalg.norm(derivative(arc, 0.0, 1) - D_I) <= 1e-10 * scale
        assert np.linalg.norm(derivative(arc, 1.0, 1) - D_F) <= 1e-10 * scale


def test_first_order_rejects_zero_derivative():
    with pytest.raises(DegenerateInputError):
        solve_first_order(P_I, P_F, np.zeros(3), D_F, 0.0, 0.0)


def test_objective_is_vectorized():
    objective = CCObjective(P_I, P_F, D_I, D_F)
    grid = np.linspace(0.0, 2.0 * np.pi, 8, endpoint=False)
    values = objective(grid[:, None], grid[None, :])
    assert values.shape == (8, 8)
    assert np.isclose(values[3, 5], objective(grid[3], grid[5]))
    assert np.all(values >= 0.0)


def test_selection_is_deterministic_and_normalized():
    first = cc_select(P_I, P_F, D_I, D_F)
    second = cc_select(P_I, P_F, D_I, D_F)
    assert first == second
    phi0, phi2, value = first
    assert 0.0 <= phi0 < 2.0 * np.pi and 0.0 <= phi2 < 2.0 * np.pi
    objective = CCObjective(P_I, P_F, D_I, D_F)
    grid = 2.0 * np.pi * np.arange(64) / 64
    assert value <= np.min(objective(grid[:, None], grid[None, :])) + 1e-15


def _ph_cubic(rng):
    a0, a1 = rng.normal(size=(2, 4))
    h0 = quat.vector(quat.sandwich_i(a0))
    h1 = 0.5 * quat.symmetric_i(a0, a1)
    h2 = quat.vector(quat.sandwich_i(a1))
    points = np.cumsum(np.stack([np.zeros(3), h0 / 3.0, h1 / 3.0, h2 / 3.0]), axis=0)
    return points, h0, h2


def test_ph_cubic_data_is_reproduced(rng):
    points, h0, h2 = _ph_cubic(rng)
    phi0, phi2, value = cc_select(points[0], points[3], h0, h2)
    assert value <= 1e-14
    cc = cc_interpolant(points[0], points[3], h0, h2)
    arc = make_arc(cc.preimage, cc.start, 0.0, 1.0)
    t = np.linspace(0.0, 1.0, 51)
    assert np.max(np.linalg.norm(evaluate(arc, t) - de_casteljau(points, t), axis=-1)) <= 1e-10


def test_split_reproduces_the_same_curve():
    cc = cc_interpolant(P_I, P_F, D_I, D_F)
    whole = make_arc(cc.preimage, P_I, 0.0, 1.0)
    halves = split_to_biarc(cc)
    left = make_arc(PreImage(c0=halves.A0H, c1=halves.A1H, c2=halves.A2H), P_I, 0.0, 0.5)
    right = make_arc(PreImage(c0=halves.B0H, c1=halves.B1H, c2=halves.B2H), P_F, 0.5, 1.0, anchor_end=True)
    for u in (0.1, 0.3, 0.5):
        assert np.allclose(evaluate(left, u), evaluate(whole, u), atol=1e-13)
    for u in (0.5, 0.7, 0.95):
        assert np.allclose(evaluate(right, u), evaluate(whole, u), atol=1e-13)
        assert np.allclose(derivative(right, u, 1), derivative(whole, u, 1), atol=1e-12)


def test_cc_arc_on_global_interval():
    v_i, v_f = D_I / 4.0, D_F / 4.0
    arc, cc = cc_arc(P_I, P_F, v_i, v_f, 2.0, 6.0)
    assert (arc.u_start, arc.u_end) == (2.0, 6.0)
    assert np.allclose(evaluate(arc, 6.0), P_F, atol=1e-12)
    assert np.allclose(derivative(arc, 2.0, 1), v_i, atol=1e-12)
    assert np.allclose(derivative(arc, 6.0, 1), v_f, atol=1e-12)
    assert cc.objective_value >= 0.0


def test_line_data_gives_unit_preimages():
    line = np.array([1.0, 0.0, 0.0])
    pre = solve_first_order(np.zeros(3), line, line, line, 0.0, 0.0)
    for c in (pre.c0, pre.c1, pre.c2):
        assert np.allclose(c, quat.I, atol=1e-15)


def test_line_data_selects_the_line():
    line = np.array([1.0, 0.0, 0.0])
    cc = cc_interpolant(np.zeros(3), line, line, line)
    assert cc.objective_value <= 1e-28
    arc = make_arc(cc.preimage, cc.start, 0.0, 1.0)
    assert np.allclose(arc.control_points.points[:, 1:], 0.0, atol=1e-15)
    assert np.allclose(evaluate(arc, np.linspace(0.0, 1.0, 11))[:, 0], np.linspace(0.0, 1.0, 11), atol=1e-14)


def test_gradient_matches_finite_differences():
    objective = CCObjective(P_I, P_F, D_I, D_F)
    step = 1e-6
    for angles in ([0.3, 1.2], [2.0, 5.0], [4.4, 0.1]):
        value, gradient = objective.value_and_gradient(np.array(angles))
        assert value == pytest.approx(float(objective(*angles)), rel=1e-13)
        fd = [
            (objective(angles[0] + step, angles[1]) - objective(angles[0] - step, angles[1])) / (2.0 * step),
            (objective(angles[0], angles[1] + step) - objective(angles[0], angles[1] - step)) / (2.0 * step),
        ]
        assert np.allclose(gradient, fd, rtol=1e-6, atol=1e-8 * objective.scale)


def _short_helix_data(span):
    u = np.array([1.0, 1.0 + span])
    points = np.stack([np.sin(u), np.cos(u), 0.2 * u], axis=-1)
    firsts = span * np.stack([np.cos(u), -np.sin(u), np.full(2, 0.2)], axis=-1)
    return points[0], points[1], firsts[0], firsts[1]


@pytest.mark.parametrize("data", [(P_I, P_F, D_I, D_F), _short_helix_data(0.5), _short_helix_data(0.02)])
def test_selected_angles_are_stationary(data):
    phi0, phi2, value = cc_select(*data)
    objective = CCObjective(*data)
    polished, gradient = objective.value_and_gradient(np.array([phi0, phi2]))
    assert polished == pytest.approx(value, rel=1e-12, abs=1e-30)
    assert np.max(np.abs(gradient)) <= 1e-10 * objective.scale


def test_selection_follows_scaling_and_translation(rng):
    phi0, phi2, value = cc_select(P_I, P_F, D_I, D_F)
    for s in (1e-3, 7.0, 1e3):
        t = 10.0 * rng.normal(size=3)
        scaled = cc_select(s * P_I + t, s * P_F + t, s * D_I, s * D_F)
        gap = np.angle(np.exp(1j * (np.array(scaled[:2]) - [phi0, phi2])))
        assert np.max(np.abs(gap)) <= 1e-9
        assert scaled[2] == pytest.approx(s * s * value, rel=1e-8)


def test_selection_evaluation_budget(monkeypatch):
    calls = []
    original = CCObjective.__call__

    def counting(self, phi0, phi2):
        calls.append(np.size(phi0))
        return original(self, phi0, phi2)

    monkeypatch.setattr(CCObjective, "__call__", counting)
    cc_select(*_short_helix_data(0.5))
    # グリッド探索の1回を除いた Nelder-Mead の評価回数
    assert len(calls) - 1 <= 400
