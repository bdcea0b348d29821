import math

import numpy as np
import pytest

from src.curves import CURVES, get_curve
from src.flow import (A1_VALUES, ALPHA2_VALUES, FIGURE_INPUT, ConvergenceFlow, ParameterFamilyFlow, StreamDemoFlow,
                      SuperconvergenceFlow, observed_order)

HELIX_STEPS = [2.0, 1.0, 0.5, 0.25]


def test_convergence_rows():
    rows = ConvergenceFlow.run("lissajous", 0, 3)
    assert [row.k for row in rows] == [0, 1, 2, 3]
    assert [row.N for row in rows] == [1, 2, 4, 8]
    assert rows[0].p_k is None
    assert math.isclose(rows[3].p_k, math.log2(rows[2].e_k / rows[3].e_k))


def test_convergence_starting_level_has_order():
    rows = ConvergenceFlow.run("helix", 2, 3)
    assert [row.k for row in rows] == [2, 3]
    assert rows[0].p_k is not None


def test_convergence_is_independent_of_jobs():
    serial = ConvergenceFlow.run("torus", 1, 3)
    parallel = ConvergenceFlow.run("torus", 1, 3, jobs=2)
    assert [row.e_k for row in serial] == [row.e_k for row in parallel]


def test_convergence_rejects_bad_levels():
    with pytest.raises(ValueError):
        ConvergenceFlow.run("helix", 3, 2)
    with pytest.raises(ValueError):
        ConvergenceFlow.run("helix", 0, 13)


@pytest.mark.parametrize("name", list(CURVES))
def test_spline_interpolates_at_knots(name):
    curve = get_curve(name)
    spline = ConvergenceFlow.build(curve, 4)
    knots = np.array(spline.knots)
    scale = max(1.0, float(np.max(np.linalg.norm(curve.evaluate(knots), axis=-1))))
    assert np.max(np.linalg.norm(spline.evaluate(knots) - curve.evaluate(knots), axis=-1)) <= 1e-9 * scale
    interior = knots[:-1]
    first = curve.evaluate(interior, 1)
    assert np.max(np.linalg.norm(spline.derivative(interior) - first, axis=-1)) <= 1e-9 * max(
        1.0, float(np.max(np.linalg.norm(first, axis=-1))))


@pytest.mark.slow
@pytest.mark.parametrize("name", list(CURVES))
def test_fourth_order_convergence(name):
    rows = ConvergenceFlow.run(name, 2, 9)
    errors = [row.e_k for row in rows]
    assert all(b < a for a, b in zip(errors[1:], errors[2:]))
    for row in rows:
        if row.k >= 7:
            assert 3.5 <= row.p_k <= 4.5, (row.k, row.p_k)


@pytest.mark.slow
def test_helix_table_value():
    row = ConvergenceFlow.run("helix", 9, 9)[0]
    assert 1.4695e-09 / 10.0 <= row.e_k <= 1.4695e-09 * 10.0


def test_end_second_derivative_superconverges():
    results = SuperconvergenceFlow.run(get_curve("helix"), HELIX_STEPS)
    steps, _, second = zip(*results)
    assert observed_order(second, steps) >= 2.7


def test_perturbed_second_derivative():
    results = SuperconvergenceFlow.run(get_curve("helix"), HELIX_STEPS, perturb=True)
    steps, position, second = zip(*results)
    assert observed_order(position, steps) >= 3.7
    assert observed_order(second, steps) >= 1.8


def test_parameter_family():
    family = ParameterFamilyFlow.run(sample_count=21)
    assert len(family) == len(A1_VALUES) + len(ALPHA2_VALUES) + 1
    for points in family.values():
        assert points.shape == (21, 3)
        assert np.allclose(points[0], FIGURE_INPUT.p_i, atol=1e-12)
        assert np.allclose(points[-1], FIGURE_INPUT.p_f, atol=1e-12)
    assert sum(1 for name, _ in family if name == "auto") == 1


def test_stream_demo_outputs(tmp_path):
    splines = StreamDemoFlow.run(tmp_path, sample_count=101)
    assert len(splines["biarc"].segments) == 5
    for name in ("spline.json", "samples.csv", "curvature.csv", "cc_samples.csv", "cc_curvature.csv"):
        assert (tmp_path / name).is_file()
    last = (tmp_path / "samples.csv").read_text().strip().splitlines()[-1]
    assert np.allclose([float(x) for x in last.split(",")[1:]], [2.0, 0.0, 7.0], atol=1e-11)
    header = (tmp_path / "curvature.csv").read_text().splitlines()[0]
    assert header == "u,arclength,kappa"
