"""
Hermite データ列・点列からの C^2 PH 五次スプラインの逐次構築。

最初のセグメントは一階 Hermite データだけを使う単一の CC 弧 (または既知の二階微分から
始めるバイアーク)。以降のセグメントは直前のセグメント右端の二階微分を受け取る
バイアークで、データが届くたびに確定して出力される。
"""
import logging
from typing import Callable, List, Literal, Optional, Tuple

import numpy as np
from pydantic import Field

from .biarc import solve_biarc
from .ccref import cc_arc
from .config import SolverSettings, get_settings
from .errors import DegenerateInputError, KnotOrderError, OutOfRangeError, PHSplineError, SolverError, ZeroChordError
from .phcore import arc_length, cumulative_length, curvature, derivative, evaluate
from .type import DerivativeEstimator, HermiteInput, PHQuinticArc, SplineSegmentRecord, FrozenModel

logger = logging.getLogger(__name__)

Mode = Literal["hermite", "points"]
Scheme = Literal["biarc", "cc"]


def _check_increasing(*params: float) -> None:
    for a, b in zip(params, params[1:]):
        if not b > a:
            raise KnotOrderError(f"パラメータが狭義単調増加ではありません: {params}")


class LocalCubicEstimator(DerivativeEstimator):
    """
    c(u_prev) = p_prev, c'(u_prev) = v_prev, c(u_cur) = p_cur, c(u_next) = p_next を満たす
    三次多項式の u_cur での微分。三次以下の多項式データに対して厳密。
    """

    def inner(self, p_prev, v_prev, p_cur, p_next, u_prev, u_cur, u_next) -> np.ndarray:
        _check_increasing(u_prev, u_cur, u_next)
        p_prev, v_prev = np.asarray(p_prev, dtype=float), np.asarray(v_prev, dtype=float)
        a, b = u_cur - u_prev, u_next - u_prev
        r1 = np.asarray(p_cur, dtype=float) - p_prev - v_prev * a
        r2 = np.asarray(p_next, dtype=float) - p_prev - v_prev * b
        det = a * a * b * b * (b - a)
        quadratic = (r1 * b ** 3 - r2 * a ** 3) / det
        cubic = (r2 * a * a - r1 * b * b) / det
        return v_prev + 2.0 * quadratic * a + 3.0 * cubic * a * a

    def start(self, p0, p1, p2, u0, u1, u2) -> np.ndarray:
        """3点を通る二次多項式の u0 での微分。"""
        _check_increasing(u0, u1, u2)
        p0 = np.asarray(p0, dtype=float)
        a, b = u1 - u0, u2 - u0
        return ((np.asarray(p1, dtype=float) - p0) * b * b - (np.asarray(p2, dtype=float) - p0) * a * a) / (a * b * (b - a))

    def end(self, p_prev, v_prev, p_last, u_prev, u_last) -> np.ndarray:
        _check_increasing(u_prev, u_last)
        span = u_last - u_prev
        return -(np.asarray(v_prev, dtype=float) * span - 2.0 * np.asarray(p_last, dtype=float)
                 + 2.0 * np.asarray(p_prev, dtype=float)) / span


class LiteralMinAJ2Estimator(LocalCubicEstimator):
    """
    印刷された係数 A..E をそのまま大域パラメータ値に適用する推定式。比較用。
    定数・一次式を再現しないので既定では使わない。
    """

    def inner(self, p_prev, v_prev, p_cur, p_next, u_prev, u_cur, u_next) -> np.ndarray:
        _check_increasing(u_prev, u_cur, u_next)
        uj, un = u_cur, u_next
        A = -(un - uj) ** 2 * (2 * un ** 2 + 2 * uj * un - uj ** 2)
        B = -uj * un ** 2 * (un - uj) ** 2
        C = un * (2 * un ** 3 - 2 * uj * un ** 2 - 3 * uj ** 2 * un + uj ** 3)
        D = uj ** 3 * (2 * un - uj)
        E = -uj * un * (un - uj) * (2 * un ** 2 + 2 * uj * un - uj ** 2)
        if E == 0.0:
            raise DegenerateInputError(f"推定式の分母がゼロです: u = ({u_prev}, {u_cur}, {u_next})")
        return (A * np.asarray(p_prev, dtype=float) + B * np.asarray(v_prev, dtype=float)
                + C * np.asarray(p_cur, dtype=float) + D * np.asarray(p_next, dtype=float)) / E

    def start(self, p0, p1, p2, u0, u1, u2) -> np.ndarray:
        _check_increasing(u0, u1, u2)
        p0, p1, p2 = (np.asarray(p, dtype=float) for p in (p0, p1, p2))
        return ((p1 - p0) * (u2 - u0) ** 2 + (p1 - p2) * (u1 - u0) ** 2) / ((u1 - u0) * (u2 - u0) * (u2 - u1))


def make_estimator(settings: Optional[SolverSettings] = None) -> DerivativeEstimator:
    settings = settings or get_settings()
    if settings.inner_estimator == "literal":
        return LiteralMinAJ2Estimator()
    return LocalCubicEstimator()


def estimate_inner_derivative(p_prev, v_prev, p_cur, p_next, u_prev: float, u_cur: float, u_next: float,
                              settings: Optional[SolverSettings] = None) -> np.ndarray:
    return make_estimator(settings).inner(p_prev, v_prev, p_cur, p_next, u_prev, u_cur, u_next)


def estimate_start_derivative(p0, p1, p2, u0: float, u1: float, u2: float,
                              settings: Optional[SolverSettings] = None) -> np.ndarray:
    return make_estimator(settings).start(p0, p1, p2, u0, u1, u2)


def estimate_end_derivative(p_prev, v_prev, p_last, u_prev: float, u_last: float,
                            settings: Optional[SolverSettings] = None) -> np.ndarray:
    return make_estimator(settings).end(p_prev, v_prev, p_last, u_prev, u_last)


def end_second_derivative(segment: SplineSegmentRecord) -> np.ndarray:
    """セグメント右端の二階微分 (大域パラメータ u に関するもの)。"""
    arc = segment.arcs[-1]
    return derivative(arc, arc.u_end, 2)


class Spline(FrozenModel):
    """確定済みのセグメント列。読み取り専用で共有できる。"""
    mode: str = Field(description="hermite または points")
    knots: List[float] = Field(description="データ点のパラメータ u_0 < u_1 < ...")
    segments: List[SplineSegmentRecord]

    @property
    def arcs(self) -> List[PHQuinticArc]:
        return [arc for segment in self.segments for arc in segment.arcs]

    @property
    def domain(self) -> Tuple[float, float]:
        return self.segments[0].u_start, self.segments[-1].u_end

    def _apply(self, function: Callable[[PHQuinticArc, np.ndarray], np.ndarray], u) -> np.ndarray:
        if not self.segments:
            raise OutOfRangeError("スプラインにセグメントがありません。")
        arcs = self.arcs
        u = np.asarray(u, dtype=float)
        flat = u.reshape(-1)
        lo, hi = self.domain
        span = 1e-14 * max(1.0, abs(lo), abs(hi))
        if np.any(flat < lo - span) or np.any(flat > hi + span):
            raise OutOfRangeError(f"u は区間 [{lo}, {hi}] の外です。")
        starts = np.array([arc.u_start for arc in arcs])
        index = np.clip(np.searchsorted(starts, flat, side="right") - 1, 0, len(arcs) - 1)
        results = None
        for k in np.unique(index):
            mask = index == k
            arc = arcs[k]
            value = function(arc, np.clip(flat[mask], arc.u_start, arc.u_end))
            if results is None:
                results = np.empty(flat.shape + value.shape[1:])
            results[mask] = value
        return results.reshape(u.shape + results.shape[1:])

    def evaluate(self, u) -> np.ndarray:
        return self._apply(evaluate, u)

    def derivative(self, u, order: int = 1) -> np.ndarray:
        return self._apply(lambda arc, x: derivative(arc, x, order), u)

    def curvature(self, u) -> np.ndarray:
        return self._apply(curvature, u)

    def arc_length(self, u) -> np.ndarray:
        """始点 u_0 から u までの弧長。"""
        arcs = self.arcs
        totals = [arc_length(arc, arc.u_start, arc.u_end) for arc in arcs]
        offsets = {id(arc): offset for arc, offset in zip(arcs, np.concatenate([[0.0], np.cumsum(totals)]))}
        return self._apply(lambda arc, x: offsets[id(arc)] + cumulative_length(arc, x), u)


def evaluate_spline(source, u, order: int = 0) -> np.ndarray:
    """
    SplineBuilder または Spline を u で評価する。order = 0 は位置、1, 2 は微分。
    """
    spline = source.freeze() if isinstance(source, SplineBuilder) else source
    if order == 0:
        return spline.evaluate(u)
    return spline.derivative(u, order)


class SplineBuilder:
    """
    データ列を1件ずつ受け取り、確定したセグメントを返す。

    mode = "hermite" では (p, v[, u]) を、mode = "points" では点 p のみを受け取る。
    点列モードでは右端の微分に次の点が必要なので、セグメント [u_{j-1}, u_j] は p_{j+1} の
    受信時に出力される。最後のセグメントは finalize() で出力する。
    scheme = "cc" ではすべてのセグメントを単一 CC 弧にする (C^1 の比較用スプライン)。
    """

    def __init__(self, mode: Mode = "hermite", scheme: Scheme = "biarc",
                 settings: Optional[SolverSettings] = None,
                 estimator: Optional[DerivativeEstimator] = None):
        if mode not in ("hermite", "points"):
            raise ValueError(f"mode は hermite または points です: {mode}")
        if scheme not in ("biarc", "cc"):
            raise ValueError(f"scheme は biarc または cc です: {scheme}")
        self.mode = mode
        self.scheme = scheme
        self.settings = settings or get_settings()
        self.estimator = estimator or make_estimator(self.settings)
        self.knots: List[float] = []
        self.points: List[np.ndarray] = []
        self.derivatives: List[np.ndarray] = []
        self.segments: List[SplineSegmentRecord] = []
        self.last_end_state: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None
        self.seed_second_derivative: Optional[np.ndarray] = None
        self.finalized = False

    def _next_knot(self, p: np.ndarray, u: Optional[float]) -> float:
        if not self.knots:
            return 0.0 if u is None else float(u)
        if u is None:
            chord = float(np.linalg.norm(p - self.points[-1]))
            tol = 1e-12 * max(float(np.linalg.norm(p)), float(np.linalg.norm(self.points[-1])))
            if chord <= tol:
                raise ZeroChordError(f"連続する点が一致しています: {p.tolist()}")
            return self.knots[-1] + chord
        if not float(u) > self.knots[-1]:
            raise KnotOrderError(f"ノットが増加していません: {u} <= {self.knots[-1]}")
        return float(u)

    def _emit(self, j: int) -> SplineSegmentRecord:
        """データ点 j-1, j の間のセグメントを構築して記録する。"""
        p_i, p_f = self.points[j - 1], self.points[j]
        v_i, v_f = self.derivatives[j - 1], self.derivatives[j]
        u_i, u_f = self.knots[j - 1], self.knots[j]
        if self.segments:
            w_i = self.last_end_state[2]
        else:
            w_i = self.seed_second_derivative
        try:
            if self.scheme == "cc" or w_i is None:
                arc, _ = cc_arc(p_i, p_f, v_i, v_f, u_i, u_f, self.settings)
                record = SplineSegmentRecord(kind="single-arc", arcs=[arc], source=(j - 1, j))
            else:
                inp = HermiteInput(p_i=p_i, p_f=p_f, v_i=v_i, v_f=v_f, w_i=w_i, u_i=u_i, u_f=u_f)
                solution = solve_biarc(inp, self.settings)
                record = SplineSegmentRecord(kind="biarc", arcs=solution.arcs, source=(j - 1, j))
        except PHSplineError as e:
            raise SolverError(str(e), segment=j - 1) from e
        self.segments.append(record)
        arc = record.arcs[-1]
        self.last_end_state = (
            evaluate(arc, arc.u_end),
            derivative(arc, arc.u_end, 1),
            end_second_derivative(record),
        )
        logger.debug("セグメント %d を出力 (%s) [%g, %g]", j - 1, record.kind, u_i, u_f)
        return record

    def _check_open(self) -> None:
        if self.finalized:
            raise PHSplineError("finalize() 済みのビルダーにはデータを追加できません。")

    def push_hermite(self, p, v, u: Optional[float] = None, w=None) -> Optional[SplineSegmentRecord]:
        """
        Hermite データ (p, v) を追加する。2件目以降はセグメントを1つ出力する。

        最初の呼び出しで w (二階微分) を与えると、最初のセグメントもバイアークになる。
        """
        if self.mode != "hermite":
            raise PHSplineError("push_hermite は hermite モード専用です。")
        self._check_open()
        p, v = np.asarray(p, dtype=float), np.asarray(v, dtype=float)
        if np.linalg.norm(v) == 0.0:
            raise DegenerateInputError(f"一階微分がゼロです: index {len(self.points)}")
        knot = self._next_knot(p, u)
        if not self.points and w is not None:
            self.seed_second_derivative = np.asarray(w, dtype=float)
        self.knots.append(knot)
        self.points.append(p)
        self.derivatives.append(v)
        if len(self.points) < 2:
            return None
        return self._emit(len(self.points) - 1)

    def push_point(self, p) -> Optional[SplineSegmentRecord]:
        """
        点を追加する。右端の微分が決まったセグメントがあれば出力する。
        """
        if self.mode != "points":
            raise PHSplineError("push_point は points モード専用です。")
        self._check_open()
        p = np.asarray(p, dtype=float)
        self.knots.append(self._next_knot(p, None))
        self.points.append(p)
        n = len(self.points) - 1
        if n < 2:
            return None
        pts, knots, est = self.points, self.knots, self.estimator
        if n == 2:
            self.derivatives.append(est.start(pts[0], pts[1], pts[2], knots[0], knots[1], knots[2]))
        self.derivatives.append(est.inner(pts[n - 2], self.derivatives[n - 2], pts[n - 1], pts[n],
                                          knots[n - 2], knots[n - 1], knots[n]))
        return self._emit(n - 1)

    def finalize(self) -> Optional[SplineSegmentRecord]:
        """点列モードの最後のセグメントを出力する。2回目以降は何もしない。"""
        if self.finalized:
            return None
        self.finalized = True
        if self.mode != "points" or len(self.points) < 2:
            return None
        n = len(self.points) - 1
        pts, knots = self.points, self.knots
        if n == 1:
            slope = (pts[1] - pts[0]) / (knots[1] - knots[0])
            self.derivatives.extend([slope, slope])
        else:
            self.derivatives.append(self.estimator.end(pts[n - 1], self.derivatives[n - 1], pts[n], knots[n - 1], knots[n]))
        return self._emit(n)

    def freeze(self) -> Spline:
        emitted = len(self.segments) + 1 if self.segments else 0
        return Spline(mode=self.mode, knots=list(self.knots[:emitted]), segments=list(self.segments))
