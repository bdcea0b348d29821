"""
一階 Hermite データに対する CC PH 五次補間曲線 (バイアークのパラメータ選択の参照曲線)。

角度 phi0, phi2 の選択は、通常の三次 Hermite 補間のホドグラフ
h_c(t) = d_i B_0^2 + d_m B_1^2 + d_f B_2^2 (d_m = 3(p_f - p_i) - d_i - d_f)
に対する L2 距離 F(phi0, phi2) = int_0^1 |V i V* - h_c|^2 dt の最小化で行う。
データが PH 三次曲線から来ていれば F = 0 で五次曲線はその三次曲線に一致する。
"""
import logging
import math
import warnings
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from . import quaternion as quat
from .config import SolverSettings, get_settings
from .errors import DegenerateInputError
from .phcore import axis_quadratic_differential, bernstein, make_arc, solve_axis_quadratic
from .type import BiarcFormCoefficients, CCInterpolant, PHQuinticArc, PreImage

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
SQRT2 = math.sqrt(2.0)

_gauss_nodes, _gauss_weights = np.polynomial.legendre.leggauss(5)
GAUSS_NODES = 0.5 * (_gauss_nodes + 1.0)
GAUSS_WEIGHTS = 0.5 * _gauss_weights
GAUSS_BASIS = bernstein(2, GAUSS_NODES)


def _check_derivatives(d_i: np.ndarray, d_f: np.ndarray) -> None:
    if np.linalg.norm(d_i) == 0.0 or np.linalg.norm(d_f) == 0.0:
        raise DegenerateInputError("端点の微分がゼロです。")


def _displacement_rhs(dp: np.ndarray, d_i: np.ndarray, d_f: np.ndarray, v0: np.ndarray, v2: np.ndarray) -> np.ndarray:
    """(4 V_1 + 3(V_0 + V_2)) i (...)* が満たすべき右辺 rho。"""
    return 120.0 * dp - 15.0 * (d_i + d_f) + 5.0 * quat.symmetric_i(v0, v2)


def solve_first_order(p_i, p_f, d_i, d_f, phi0: float, phi2: float, phi1: float = 0.0,
                      settings: Optional[SolverSettings] = None) -> PreImage:
    """
    端点位置と t に関する端点微分 d_i, d_f を補間するプリイメージ V_0, V_1, V_2。

    V_1 は W = 4 V_1 + 3 (V_0 + V_2) についての二次方程式 W i W* = rho を解いて決める。
    W の角度は phi1 (通常 0)。

    Raises:
        DegenerateInputError: 微分がゼロ、または rho = 0 の場合。
    """
    p_i, p_f = np.asarray(p_i, dtype=float), np.asarray(p_f, dtype=float)
    d_i, d_f = np.asarray(d_i, dtype=float), np.asarray(d_f, dtype=float)
    _check_derivatives(d_i, d_f)
    v0 = solve_axis_quadratic(d_i, phi0, settings)
    v2 = solve_axis_quadratic(d_f, phi2, settings)
    rho = _displacement_rhs(p_f - p_i, d_i, d_f, v0, v2)
    if np.linalg.norm(rho) == 0.0:
        raise DegenerateInputError("変位方程式の右辺 rho がゼロです。")
    w = solve_axis_quadratic(rho, phi1, settings)
    v1 = 0.25 * (w - 3.0 * (v0 + v2))
    return PreImage(c0=v0, c1=v1, c2=v2)


class CCObjective:
    """
    F(phi0, phi2) を評価する。phi0, phi2 はブロードキャスト可能な配列でよい。
    """

    def __init__(self, p_i, p_f, d_i, d_f, settings: Optional[SolverSettings] = None):
        self.settings = settings or get_settings()
        self.dp = np.asarray(p_f, dtype=float) - np.asarray(p_i, dtype=float)
        self.d_i = np.asarray(d_i, dtype=float)
        self.d_f = np.asarray(d_f, dtype=float)
        _check_derivatives(self.d_i, self.d_f)
        self.d_m = 3.0 * self.dp - self.d_i - self.d_f
        # V_0, V_2 の角度 0 の解。角度は右から exp_i を掛けて与える
        self.n0 = solve_axis_quadratic(self.d_i, 0.0, self.settings)
        self.n2 = solve_axis_quadratic(self.d_f, 0.0, self.settings)
        self.reference = bernstein(2, GAUSS_NODES) @ np.stack([self.d_i, self.d_m, self.d_f])
        self.scale = max(np.linalg.norm(self.d_i), np.linalg.norm(self.d_f), np.linalg.norm(self.d_m)) ** 2

    def __call__(self, phi0, phi2) -> np.ndarray:
        v0 = quat.mul(self.n0, quat.exp_i(phi0))
        v2 = quat.mul(self.n2, quat.exp_i(phi2))
        v0, v2 = np.broadcast_arrays(v0, v2)
        rho = _displacement_rhs(self.dp, self.d_i, self.d_f, v0, v2)
        degenerate = np.asarray(np.linalg.norm(rho, axis=-1) == 0.0)
        rho = np.where(degenerate[..., None], np.array([1.0, 0.0, 0.0]), rho)
        w = solve_axis_quadratic(rho, 0.0, self.settings)
        v1 = 0.25 * (w - 3.0 * (v0 + v2))
        coefficients = np.stack([v0, v1, v2], axis=-2)
        values = GAUSS_BASIS @ coefficients
        hodograph = quat.vector(quat.sandwich_i(values))
        residual = np.sum((hodograph - self.reference) ** 2, axis=-1)
        value = residual @ GAUSS_WEIGHTS
        return np.where(degenerate, np.inf, value)

    def value_and_gradient(self, angles: np.ndarray) -> Tuple[float, np.ndarray]:
        """
        F とその (phi0, phi2) に関する勾配。

        dV_0/dphi0 = V_0 i, dV_2/dphi2 = V_2 i。W は rho を通して両方の角度に依存する。

        Raises:
            DegenerateInputError: rho = 0 または W が軸退化の分岐に入る場合。
        """
        v0 = quat.mul(self.n0, quat.exp_i(angles[0]))
        v2 = quat.mul(self.n2, quat.exp_i(angles[1]))
        dv0, dv2 = quat.mul(v0, quat.I), quat.mul(v2, quat.I)
        rho = _displacement_rhs(self.dp, self.d_i, self.d_f, v0, v2)
        if np.linalg.norm(rho) == 0.0:
            raise DegenerateInputError("変位方程式の右辺 rho がゼロです。")
        w = solve_axis_quadratic(rho, 0.0, self.settings)
        d_rho = 5.0 * np.stack([quat.symmetric_i(dv0, v2), quat.symmetric_i(v0, dv2)])
        dw = axis_quadratic_differential(rho, d_rho, self.settings)
        v1 = 0.25 * (w - 3.0 * (v0 + v2))
        dv1 = 0.25 * (dw - 3.0 * np.stack([dv0, dv2]))
        zero = quat.ZERO
        values = GAUSS_BASIS @ np.stack([v0, v1, v2])
        d_values = GAUSS_BASIS @ np.stack([np.stack([dv0, dv1[0], zero]), np.stack([zero, dv1[1], dv2])])
        residual = quat.vector(quat.sandwich_i(values)) - self.reference
        d_hodograph = quat.symmetric_i(d_values, values)
        value = float(np.sum(residual ** 2, axis=-1) @ GAUSS_WEIGHTS)
        gradient = 2.0 * np.sum(d_hodograph * residual, axis=-1) @ GAUSS_WEIGHTS
        return value, gradient


def _polish(objective: CCObjective, start: np.ndarray, settings: SolverSettings):
    """
    解析的な勾配と、勾配の差分によるヘッセ行列で Newton 法をかける。
    直線に近いデータでは F は最小点の近くでほぼ角度の4次になり、関数値の比較だけでは角度が定まらない。
    """

    def normalized(x):
        value, gradient = objective.value_and_gradient(x)
        return value / objective.scale, gradient / objective.scale

    try:
        if np.max(np.abs(normalized(start)[1])) <= settings.cc_gtol:
            return None
        with warnings.catch_warnings():
            # 丸め誤差の水準に達すると直線探索が警告を出す
            warnings.simplefilter("ignore", RuntimeWarning)
            return minimize(
                normalized,
                start,
                jac=True,
                hess="2-point",
                method="Newton-CG",
                options={"xtol": settings.cc_polish_xtol, "maxiter": settings.cc_polish_maxiter},
            )
    except DegenerateInputError as e:
        logger.debug("勾配による精密化を省略します: %s", e)
        return None


def cc_select(p_i, p_f, d_i, d_f, settings: Optional[SolverSettings] = None) -> Tuple[float, float, float]:
    """
    CC 基準の角度 (phi0, phi2) と目的関数値を返す。

    一様グリッドの探索で初期値を選び (同値なら辞書式で小さい方)、Nelder-Mead で絞り込んだあと
    勾配を使った Newton 法で仕上げる。角度は [0, 2 pi) に正規化される。
    """
    settings = settings or get_settings()
    objective = CCObjective(p_i, p_f, d_i, d_f, settings)
    n = settings.cc_grid_size
    grid = TWO_PI * np.arange(n) / n
    values = objective(grid[:, None], grid[None, :]) / objective.scale
    index = np.unravel_index(np.argmin(values), values.shape)
    angles = np.array([grid[index[0]], grid[index[1]]])
    best_value = float(values[index])

    step = settings.cc_simplex_scale
    simplex = np.array([angles, angles + [step, 0.0], angles + [0.0, step]])
    result = minimize(
        lambda x: float(objective(x[0], x[1])) / objective.scale,
        angles,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "xatol": settings.cc_xatol,
            "fatol": settings.cc_fatol,
            "maxiter": settings.cc_maxiter,
            "maxfev": 2 * settings.cc_maxiter,
        },
    )
    if result.fun < best_value - settings.cc_fatol:
        angles, best_value = result.x, float(result.fun)
    if not result.success:
        logger.debug("Nelder-Mead が収束判定前に停止しました: %s", result.message)

    polished = _polish(objective, angles, settings)
    if polished is not None and np.all(np.isfinite(polished.x)) and polished.fun <= best_value:
        angles, best_value = polished.x, float(polished.fun)
        logger.debug("Newton 法: %s (nit=%d)", polished.message, polished.nit)
    phi0, phi2 = np.mod(angles, TWO_PI)
    value = best_value * objective.scale
    logger.debug("CC 角度: phi0=%.15f phi2=%.15f F=%.3e (nfev=%d)", phi0, phi2, value, result.nfev)
    return float(phi0), float(phi2), value


def cc_interpolant(p_i, p_f, d_i, d_f, settings: Optional[SolverSettings] = None) -> CCInterpolant:
    """CC 基準で角度を選んだ一階 Hermite PH 五次補間曲線。"""
    phi0, phi2, value = cc_select(p_i, p_f, d_i, d_f, settings)
    pre = solve_first_order(p_i, p_f, d_i, d_f, phi0, phi2, settings=settings)
    return CCInterpolant(preimage=pre, start=p_i, end=p_f, phi0=phi0, phi2=phi2, objective_value=value)


def split_to_biarc(cc: CCInterpolant) -> BiarcFormCoefficients:
    """t = 1/2 で分割した左右の弧のプリイメージ係数 (それぞれの局所パラメータに関するもの)。"""
    v0, v1, v2 = cc.preimage.c0, cc.preimage.c1, cc.preimage.c2
    joint = (v0 + 2.0 * v1 + v2) / (4.0 * SQRT2)
    return BiarcFormCoefficients(
        A0H=v0 / SQRT2,
        A1H=(v0 + v1) / (2.0 * SQRT2),
        A2H=joint,
        B0H=joint,
        B1H=(v1 + v2) / (2.0 * SQRT2),
        B2H=v2 / SQRT2,
    )


def cc_arc(p_i, p_f, v_i, v_f, u_i: float, u_f: float, settings: Optional[SolverSettings] = None) -> Tuple[PHQuinticArc, CCInterpolant]:
    """
    [u_i, u_f] 上の単一 CC 弧。v_i, v_f は大域パラメータ u に関する微分。
    """
    span = u_f - u_i
    cc = cc_interpolant(p_i, p_f, span * np.asarray(v_i, dtype=float), span * np.asarray(v_f, dtype=float), settings)
    return make_arc(cc.preimage, cc.start, u_i, u_f), cc
