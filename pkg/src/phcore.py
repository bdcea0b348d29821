"""
四元数プリイメージから作る PH 五次曲線。

弧はすべて局所パラメータ xi in [0, 1] で保持し、大域パラメータ u との変換
xi = (u - u_start) / (u_end - u_start) はこのモジュールの評価関数が行う。
"""
import logging
import math
from typing import Optional

import numpy as np

from . import quaternion as quat
from .config import SolverSettings, get_settings
from .errors import DegenerateInputError, OutOfRangeError, SingularPointError
from .type import ControlPolygon, PHQuinticArc, PreImage

logger = logging.getLogger(__name__)


def _bisector_axis(unit: np.ndarray) -> np.ndarray:
    """i + r/|r| を桁落ちなしで計算する (x < 0 では 1 + x = (y^2 + z^2) / (1 - x))。"""
    x = unit[..., :1]
    tail = np.sum(unit[..., 1:] ** 2, axis=-1, keepdims=True)
    gap = np.where(x < 0.0, tail / (1.0 - np.minimum(x, 0.0)), 1.0 + x)
    return np.concatenate([gap, unit[..., 1:]], axis=-1)


def solve_axis_quadratic(r, phi=0.0, settings: Optional[SolverSettings] = None) -> np.ndarray:
    """
    V i V* = r を満たす四元数 V = sqrt(|r|) n exp_i(phi) を返す。

    n = (i + r/|r|) / |i + r/|r||。r/|r| が -i に近い (|i + r/|r|| < antiparallel_tol) ときは
    n の代わりに Q k を使う。Q は -i を r/|r| に移す最短回転で、r/|r| = -i なら Q = 1 (k i k* = -i)。
    r と phi は先頭軸でブロードキャストされる。

    Raises:
        DegenerateInputError: r = 0 の場合。
    """
    settings = settings or get_settings()
    r = np.asarray(r, dtype=float)
    norm = np.linalg.norm(r, axis=-1, keepdims=True)
    if np.any(norm == 0.0):
        raise DegenerateInputError("V i V* = r の右辺がゼロベクトルです。")
    unit = r / norm
    axis = _bisector_axis(unit)
    axis_norm = np.linalg.norm(axis, axis=-1, keepdims=True)
    antiparallel = axis_norm < settings.antiparallel_tol
    if np.any(antiparallel):
        logger.debug("軸退化の分岐を使用: r = %s", r)
    safe_norm = np.where(antiparallel, 1.0, axis_norm)
    x = unit[..., :1]
    # r/|r| = +i ではゼロベクトルになるが、その場合は使われない
    shortest = np.concatenate([1.0 - x, np.zeros_like(x), unit[..., 2:3], -unit[..., 1:2]], axis=-1)
    shortest_norm = np.maximum(np.linalg.norm(shortest, axis=-1, keepdims=True), np.finfo(float).tiny)
    fallback = quat.mul(shortest / shortest_norm, quat.K)
    base = np.where(antiparallel, fallback, quat.pure(axis / safe_norm))
    return np.sqrt(norm) * quat.mul(base, quat.exp_i(phi))


def axis_quadratic_differential(r, dr, settings: Optional[SolverSettings] = None) -> np.ndarray:
    """
    phi = 0 の解 V(r) = sqrt(|r|) n の dr 方向の微分。V は純ベクトル四元数なので結果のスカラー部は 0。
    dr は先頭軸に複数の方向を並べてよい。

    Raises:
        DegenerateInputError: r = 0 または軸退化の分岐に入る場合 (そこでは V は微分可能でない)。
    """
    settings = settings or get_settings()
    r = np.asarray(r, dtype=float)
    dr = np.asarray(dr, dtype=float)
    norm = np.linalg.norm(r, axis=-1, keepdims=True)
    if np.any(norm == 0.0):
        raise DegenerateInputError("V i V* = r の右辺がゼロベクトルです。")
    unit = r / norm
    axis = _bisector_axis(unit)
    axis_norm = np.linalg.norm(axis, axis=-1, keepdims=True)
    if np.any(axis_norm < settings.antiparallel_tol):
        raise DegenerateInputError("r/|r| が -i に近いため V(r) の微分は定義されません。")
    n = axis / axis_norm
    d_norm = np.sum(dr * unit, axis=-1, keepdims=True)
    d_unit = (dr - d_norm * unit) / norm
    d_n = (d_unit - np.sum(d_unit * n, axis=-1, keepdims=True) * n) / axis_norm
    root = np.sqrt(norm)
    return quat.pure(0.5 * d_norm / root * n + root * d_n)


def hodograph_coefficients(pre: PreImage) -> np.ndarray:
    """A(xi) i A*(xi) の4次 Bernstein 係数 (5, 3)。"""
    c0, c1, c2 = pre.c0, pre.c1, pre.c2
    return np.stack([
        quat.vector(quat.sandwich_i(c0)),
        0.5 * quat.symmetric_i(c0, c1),
        (quat.symmetric_i(c0, c2) + 4.0 * quat.vector(quat.sandwich_i(c1))) / 6.0,
        0.5 * quat.symmetric_i(c1, c2),
        quat.vector(quat.sandwich_i(c2)),
    ])


def control_points_from_start(pre: PreImage, start) -> ControlPolygon:
    """始点から前向きの差分で制御点を積み上げる。"""
    c0, c1, c2 = pre.c0, pre.c1, pre.c2
    p0 = np.asarray(start, dtype=float)
    p1 = p0 + quat.vector(quat.sandwich_i(c0)) / 5.0
    p2 = p1 + quat.symmetric_i(c0, c1) / 10.0
    p3 = p2 + (quat.symmetric_i(c0, c2) + 4.0 * quat.vector(quat.sandwich_i(c1))) / 30.0
    p4 = p3 + quat.symmetric_i(c1, c2) / 10.0
    p5 = p4 + quat.vector(quat.sandwich_i(c2)) / 5.0
    return ControlPolygon(points=np.stack([p0, p1, p2, p3, p4, p5]))


def control_points_from_end(pre: PreImage, end) -> ControlPolygon:
    """終点から後ろ向きの差分で制御点を積み上げる。"""
    c0, c1, c2 = pre.c0, pre.c1, pre.c2
    p5 = np.asarray(end, dtype=float)
    p4 = p5 - quat.vector(quat.sandwich_i(c2)) / 5.0
    p3 = p4 - quat.symmetric_i(c1, c2) / 10.0
    p2 = p3 - (quat.symmetric_i(c0, c2) + 4.0 * quat.vector(quat.sandwich_i(c1))) / 30.0
    p1 = p2 - quat.symmetric_i(c0, c1) / 10.0
    p0 = p1 - quat.vector(quat.sandwich_i(c0)) / 5.0
    return ControlPolygon(points=np.stack([p0, p1, p2, p3, p4, p5]))


def make_arc(pre: PreImage, anchor, u_start: float, u_end: float, anchor_end: bool = False) -> PHQuinticArc:
    if anchor_end:
        polygon = control_points_from_end(pre, anchor)
    else:
        polygon = control_points_from_start(pre, anchor)
    return PHQuinticArc(
        preimage=pre,
        anchor=anchor,
        anchor_end=anchor_end,
        u_start=float(u_start),
        u_end=float(u_end),
        control_points=polygon,
    )


def bernstein(n: int, xi) -> np.ndarray:
    """次数 n の Bernstein 基底 (..., n+1)。"""
    xi = np.asarray(xi, dtype=float)[..., None]
    j = np.arange(n + 1)
    binom = np.array([math.comb(n, k) for k in j], dtype=float)
    return binom * xi ** j * (1.0 - xi) ** (n - j)


def preimage_at(pre: PreImage, xi) -> np.ndarray:
    return bernstein(2, xi) @ pre.coefficients


def preimage_derivative_at(pre: PreImage, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)[..., None]
    return 2.0 * ((pre.c1 - pre.c0) * (1.0 - xi) + (pre.c2 - pre.c1) * xi)


def de_casteljau(points: np.ndarray, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    b = np.broadcast_to(points, xi.shape + points.shape).copy()
    t = xi[..., None, None]
    for _ in range(points.shape[0] - 1):
        b = (1.0 - t) * b[..., :-1, :] + t * b[..., 1:, :]
    return b[..., 0, :]


def evaluate(arc: PHQuinticArc, u) -> np.ndarray:
    """大域パラメータ u での位置。"""
    return de_casteljau(arc.control_points.points, arc.local(u))


def derivative(arc: PHQuinticArc, u, order: int = 1) -> np.ndarray:
    """
    大域パラメータ u に関する order 階微分 (order = 1, 2)。

    一階は A i A* / h_loc、二階は (A' i A* + A i A'*) / h_loc^2。
    """
    xi = arc.local(u)
    a = preimage_at(arc.preimage, xi)
    if order == 1:
        return quat.vector(quat.sandwich_i(a)) / arc.length
    if order == 2:
        da = preimage_derivative_at(arc.preimage, xi)
        return quat.symmetric_i(da, a) / arc.length ** 2
    raise ValueError(f"order は 1 または 2 です: {order}")


def speed_coefficients(pre: PreImage) -> np.ndarray:
    """局所パラメトリック速度 |A(xi)|^2 の4次 Bernstein 係数。"""
    c0, c1, c2 = pre.c0, pre.c1, pre.c2
    return np.array([
        quat.inner4(c0, c0),
        quat.inner4(c0, c1),
        (2.0 * quat.inner4(c1, c1) + quat.inner4(c0, c2)) / 3.0,
        quat.inner4(c1, c2),
        quat.inner4(c2, c2),
    ])


def parametric_speed(arc: PHQuinticArc, u) -> np.ndarray:
    """局所パラメータ xi に関する速度 sigma(xi) = |A(xi)|^2。"""
    return bernstein(4, arc.local(u)) @ speed_coefficients(arc.preimage)


def speed(arc: PHQuinticArc, u) -> np.ndarray:
    """大域パラメータ u に関する速度 |dx/du|。"""
    return parametric_speed(arc, u) / arc.length


def cumulative_length(arc: PHQuinticArc, u) -> np.ndarray:
    """弧の始点から u までの弧長。速度多項式の5次原始関数を厳密に評価する。"""
    sigma = speed_coefficients(arc.preimage)
    primitive = np.concatenate([[0.0], np.cumsum(sigma) / 5.0])
    return bernstein(5, arc.local(u)) @ primitive


def arc_length(arc: PHQuinticArc, u_a: float, u_b: float) -> float:
    """[u_a, u_b] の弧長。"""
    if u_b < u_a:
        raise OutOfRangeError(f"区間が逆順です: [{u_a}, {u_b}]")
    s_a, s_b = cumulative_length(arc, np.array([u_a, u_b]))
    return float(s_b - s_a)


def curvature(arc: PHQuinticArc, u) -> np.ndarray:
    """
    曲率 |x' x x''| / |x'|^3。

    Raises:
        SingularPointError: |x'(u)| <= 1e-12 の場合。
    """
    d1 = derivative(arc, u, 1)
    d2 = derivative(arc, u, 2)
    norm = np.linalg.norm(d1, axis=-1)
    if np.any(norm <= 1e-12):
        raise SingularPointError(f"一階微分が消えています: u = {u}")
    return np.linalg.norm(np.cross(d1, d2), axis=-1) / norm ** 3
