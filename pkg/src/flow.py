"""
実験フロー。各フローは静的メソッドだけを持ち、内部状態を持たない。
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .biarc import solve_biarc, solve_biarc_with_parameters
from .config import SolverSettings, get_settings
from .curves import CURVES, get_curve
from .errors import PHSplineError, SolverError
from .io import (curvature_rows, parse_hermite_text, parse_points_text, read_text, sample_rows,
                 write_csv, write_spline_json)
from .phcore import derivative, evaluate
from .stream import Mode, Scheme, Spline, SplineBuilder
from .type import AnalyticCurve, ConvergenceRow, HermiteInput, SplineSegmentRecord

logger = logging.getLogger(__name__)

DEMO_POINTS = np.array([
    [0.0, 0.0, 0.0],
    [-5.0, 5.0, 2.0],
    [0.0, 10.0, -2.0],
    [8.0, 12.0, 5.0],
    [15.0, 2.0, 3.0],
    [2.0, 0.0, 7.0],
])

FIGURE_INPUT = HermiteInput(
    p_i=[0.0, 0.0, 0.0],
    p_f=[1.0, 1.0, 1.0],
    v_i=[1.0, 0.0, 1.0],
    v_f=[0.0, 1.0, 1.0],
    w_i=[-0.1, 0.5, -1.5],
)
A1_VALUES = tuple(-2.0 + 0.5 * k for k in range(10))
ALPHA2_VALUES = tuple(k * math.pi / 5.0 for k in range(10))


def observed_order(errors: Sequence[float], steps: Sequence[float]) -> float:
    """log(error) を log(step) に最小二乗で当てはめた傾き。"""
    slope, _ = np.polyfit(np.log2(np.asarray(steps)), np.log2(np.asarray(errors)), 1)
    return float(slope)


def _single_segment_spline(arcs, u_i: float, u_f: float) -> Spline:
    record = SplineSegmentRecord(kind="biarc" if len(arcs) == 2 else "single-arc", arcs=list(arcs), source=(0, 1))
    return Spline(mode="hermite", knots=[u_i, u_f], segments=[record])


class ConvergenceFlow:
    @staticmethod
    def build(curve: AnalyticCurve, k: int, settings: Optional[SolverSettings] = None) -> Spline:
        """
        一様グリッド u_j = j U / 2^k 上の厳密な Hermite データからスプラインを作る。
        j = 0 だけ厳密な二階微分を与え、以降は直前のバイアークから引き継ぐ。
        """
        lo, hi = curve.domain
        n = 2 ** k
        u = lo + (hi - lo) * np.arange(n + 1) / n
        points = curve.evaluate(u, 0)
        firsts = curve.evaluate(u, 1)
        builder = SplineBuilder("hermite", settings=settings)
        builder.push_hermite(points[0], firsts[0], u=float(u[0]), w=curve.evaluate(u[0], 2))
        for j in range(1, n + 1):
            builder.push_hermite(points[j], firsts[j], u=float(u[j]))
        return builder.freeze()

    @staticmethod
    def max_deviation(curve: AnalyticCurve, spline: Spline, sample_count: int) -> float:
        """等しいパラメータ値での最大偏差 max |C(u) - X(u)|。"""
        lo, hi = curve.domain
        u = np.linspace(lo, hi, sample_count)
        return float(np.max(np.linalg.norm(curve.evaluate(u, 0) - spline.evaluate(u), axis=-1)))

    @staticmethod
    def level_error(name: str, k: int, settings: Optional[SolverSettings] = None) -> float:
        settings = settings or get_settings()
        curve = get_curve(name)
        try:
            spline = ConvergenceFlow.build(curve, k, settings)
        except SolverError as e:
            raise SolverError(f"{name}, k={k}: {e}") from e
        error = ConvergenceFlow.max_deviation(curve, spline, settings.sample_count)
        logger.info("%s k=%d N=%d e_k=%.4e", name, k, 2 ** k, error)
        return error

    @staticmethod
    def run(name: str, k_min: int = 0, k_max: int = 9, settings: Optional[SolverSettings] = None,
            jobs: int = 1) -> List[ConvergenceRow]:
        """
        収束実験。k_min >= 1 のときは p_{k_min} のために k_min - 1 も計算する。

        jobs > 1 ではレベルごとにプロセスを分ける。結果は jobs に依存しない。
        """
        if not 0 <= k_min <= k_max <= 12:
            raise ValueError(f"0 <= kmin <= kmax <= 12 が必要です: kmin={k_min}, kmax={k_max}")
        settings = settings or get_settings()
        get_curve(name)
        levels = list(range(max(0, k_min - 1), k_max + 1))
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as executor:
                errors = list(executor.map(ConvergenceFlow.level_error, [name] * len(levels), levels,
                                           [settings] * len(levels)))
        else:
            errors = [ConvergenceFlow.level_error(name, k, settings) for k in levels]
        by_level = dict(zip(levels, errors))
        rows = []
        for k in range(k_min, k_max + 1):
            p_k = math.log2(by_level[k - 1] / by_level[k]) if k >= 1 else None
            rows.append(ConvergenceRow(curve=name, k=k, N=2 ** k, e_k=by_level[k], p_k=p_k))
        return rows

    @staticmethod
    def run_all(k_min: int = 0, k_max: int = 9, settings: Optional[SolverSettings] = None,
                jobs: int = 1) -> List[ConvergenceRow]:
        return [row for name in CURVES for row in ConvergenceFlow.run(name, k_min, k_max, settings, jobs)]


class SuperconvergenceFlow:
    @staticmethod
    def run(curve: AnalyticCurve, steps: Sequence[float], u0: Optional[float] = None, perturb: bool = False,
            epsilon: float = 1e-2, seed: int = 0,
            settings: Optional[SolverSettings] = None) -> List[Tuple[float, float, float]]:
        """
        区間 [u0, u0 + ds] 上の単一バイアークを厳密データから作り、
        (ds, 最大位置誤差, 右端の二階微分の誤差) を返す。

        perturb = True では w_i に epsilon ds^2 e (e は seed で決まる単位ベクトル) を加える。
        """
        lo, hi = curve.domain
        u0 = lo if u0 is None else u0
        direction = np.random.default_rng(seed).normal(size=3)
        direction /= np.linalg.norm(direction)
        results = []
        for ds in steps:
            u_f = u0 + ds
            w_i = curve.evaluate(u0, 2)
            if perturb:
                w_i = w_i + epsilon * ds * ds * direction
            inp = HermiteInput(
                p_i=curve.evaluate(u0, 0), p_f=curve.evaluate(u_f, 0),
                v_i=curve.evaluate(u0, 1), v_f=curve.evaluate(u_f, 1),
                w_i=w_i, u_i=u0, u_f=u_f,
            )
            solution = solve_biarc(inp, settings)
            spline = _single_segment_spline(solution.arcs, u0, u_f)
            u = np.linspace(u0, u_f, 257)
            position = float(np.max(np.linalg.norm(spline.evaluate(u) - curve.evaluate(u, 0), axis=-1)))
            second = float(np.linalg.norm(derivative(solution.right, u_f, 2) - curve.evaluate(u_f, 2)))
            results.append((float(ds), position, second))
            logger.debug("ds=%.4e position=%.3e second=%.3e", ds, position, second)
        return results


class ParameterFamilyFlow:
    @staticmethod
    def run(inp: HermiteInput = FIGURE_INPUT, a1_values: Sequence[float] = A1_VALUES,
            alpha2_values: Sequence[float] = ALPHA2_VALUES, sample_count: int = 101,
            settings: Optional[SolverSettings] = None) -> Dict[Tuple[str, float], np.ndarray]:
        """
        a1 または alpha2 だけを変えたバイアークの族。キーは (族名, 値)、値は (sample_count, 3) の点列。
        自動選択の解は ("auto", a1) に入る。
        """
        u = np.linspace(inp.u_i, inp.u_f, sample_count)
        family = {}
        variants = [("a1", value, {"a1": value}) for value in a1_values]
        variants += [("alpha2", value, {"alpha2": value}) for value in alpha2_values]
        for name, value, parameters in variants:
            solution = solve_biarc_with_parameters(inp, settings=settings, **parameters)
            family[(name, float(value))] = _single_segment_spline(solution.arcs, inp.u_i, inp.u_f).evaluate(u)
        selected = solve_biarc(inp, settings)
        family[("auto", selected.a1)] = _single_segment_spline(selected.arcs, inp.u_i, inp.u_f).evaluate(u)
        return family

    @staticmethod
    def write(path, sample_count: int = 101, settings: Optional[SolverSettings] = None) -> None:
        family = ParameterFamilyFlow.run(sample_count=sample_count, settings=settings)
        u = np.linspace(FIGURE_INPUT.u_i, FIGURE_INPUT.u_f, sample_count)
        rows = [[name, value, t, *map(float, p)]
                for (name, value), points in family.items() for t, p in zip(u, points)]
        write_csv(path, ["family", "value", "u", "x", "y", "z"], rows)


class InterpolateFlow:
    @staticmethod
    def build(text: str, mode: Mode, scheme: Scheme = "biarc",
              settings: Optional[SolverSettings] = None) -> Spline:
        """
        入力テキストからスプラインを作る。データ起因のエラーには入力の行番号を付ける。
        """
        builder = SplineBuilder(mode, scheme=scheme, settings=settings)
        if mode == "hermite":
            records = parse_hermite_text(text)
            push = lambda record: builder.push_hermite(record[1], record[2], u=record[0])  # noqa: E731
        else:
            records = parse_points_text(text)
            push = builder.push_point
        for line, record in records:
            try:
                push(record)
            except SolverError:
                raise
            except PHSplineError as e:
                raise type(e)(f"line {line}: {e}") from e
        builder.finalize()
        if not builder.segments:
            raise SolverError("2 件以上のデータが必要です。")
        logger.info("%d セグメントを構築しました (%s, %s)", len(builder.segments), mode, scheme)
        return builder.freeze()

    @staticmethod
    def run(input_path, mode: Mode, out_json=None, out_csv=None, scheme: Scheme = "biarc",
            sample_count: Optional[int] = None, settings: Optional[SolverSettings] = None) -> Spline:
        settings = settings or get_settings()
        spline = InterpolateFlow.build(read_text(input_path), mode, scheme, settings)
        if out_json is not None:
            write_spline_json(spline, out_json)
        if out_csv is not None:
            write_csv(out_csv, ["u", "x", "y", "z"], sample_rows(spline, sample_count or settings.sample_count))
        return spline


class StreamDemoFlow:
    @staticmethod
    def build(points=DEMO_POINTS, scheme: Scheme = "biarc", settings: Optional[SolverSettings] = None) -> Spline:
        builder = SplineBuilder("points", scheme=scheme, settings=settings)
        for p in points:
            builder.push_point(p)
        builder.finalize()
        return builder.freeze()

    @staticmethod
    def run(outdir, sample_count: int = 1001, settings: Optional[SolverSettings] = None) -> Dict[str, Spline]:
        """
        デモ点列から C^2 スプラインと C^1 CC スプラインを作り、outdir に書き出す。
        """
        outdir = Path(outdir)
        splines = {
            "biarc": StreamDemoFlow.build(scheme="biarc", settings=settings),
            "cc": StreamDemoFlow.build(scheme="cc", settings=settings),
        }
        c2 = splines["biarc"]
        write_spline_json(c2, outdir / "spline.json")
        write_csv(outdir / "samples.csv", ["u", "x", "y", "z"], sample_rows(c2, sample_count))
        write_csv(outdir / "curvature.csv", ["u", "arclength", "kappa"], curvature_rows(c2, sample_count))
        c1 = splines["cc"]
        write_csv(outdir / "cc_samples.csv", ["u", "x", "y", "z"], sample_rows(c1, sample_count))
        write_csv(outdir / "cc_curvature.csv", ["u", "arclength", "kappa"], curvature_rows(c1, sample_count))
        end = evaluate(c2.arcs[-1], c2.domain[1])
        logger.info("デモ: %d セグメント, 終点 %s", len(c2.segments), end.tolist())
        return splines


run_convergence = ConvergenceFlow.run
end_second_derivative_errors = SuperconvergenceFlow.run
parameter_family = ParameterFamilyFlow.run
interpolate_file = InterpolateFlow.run
demo_stream = StreamDemoFlow.run
