"""
C^2 PH 五次バイアーク。

左端の位置・一階・二階微分と右端の位置・一階微分を補間し、中点 u_m で C^2 に接続する
二つの PH 五次曲線を作る。自由パラメータ (alpha0, beta2, a1, alpha2) は CC 参照曲線を
二分したプリイメージ係数に最も近くなるように選ぶ。
"""
import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np

from . import quaternion as quat
from .ccref import cc_interpolant, split_to_biarc
from .config import SolverSettings, get_settings
from .errors import DegenerateInputError
from .phcore import derivative, evaluate, make_arc, solve_axis_quadratic
from .type import BiarcSolution, HermiteInput, PreImage

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def compute_a1(A0: np.ndarray, A1H: np.ndarray) -> float:
    """
    |A_1 - A_1^H|^2 を最小にする a_1 = |A_0| <U_0, A_1^H> (U_0 = -A_0 i / |A_0|)。
    """
    norm = float(quat.modulus(A0))
    if norm == 0.0:
        raise DegenerateInputError("A_0 がゼロです。")
    u0 = -quat.mul(A0, quat.I) / norm
    return norm * float(quat.inner4(u0, A1H))


def compute_alpha2(G: np.ndarray, q: np.ndarray, A2H: np.ndarray) -> Tuple[float, float, float, bool]:
    """
    |A_2(alpha) - A_2^H|^2 = f1 cos(alpha) + f2 sin(alpha) + const を最小にする alpha2。

    A_2(alpha) = -G/40 + q exp_i(alpha)、X = -G/40 - A_2^H とすると f1 = 2 <X, q>, f2 = 2 <X, q i>。
    q が純ベクトルなら f1 = scalar(G q - q G*)/40 - scalar(q A2H* - A2H q) などの形と一致するが、
    内積の形は q にスカラー部があっても (軸退化の分岐) そのまま成り立つ。

    Returns:
        (alpha2, f1, f2, degenerate)。f1 = f2 = 0 なら alpha2 = 0, degenerate = True。
    """
    if float(quat.modulus(q)) == 0.0:
        raise DegenerateInputError("q がゼロです。")
    x = -np.asarray(G, dtype=float) / 40.0 - np.asarray(A2H, dtype=float)
    f1 = 2.0 * float(quat.inner4(x, q))
    f2 = 2.0 * float(quat.inner4(x, quat.mul(q, quat.I)))
    if f1 == 0.0 and f2 == 0.0:
        return 0.0, f1, f2, True
    alpha2 = float(np.mod(math.pi + math.atan2(f2, f1), TWO_PI))
    return alpha2, f1, f2, False


def solve_biarc_with_parameters(inp: HermiteInput, a1: Optional[float] = None, alpha2: Optional[float] = None,
                                angle_shift: float = 0.0, settings: Optional[SolverSettings] = None) -> BiarcSolution:
    """
    バイアークを構築する。a1, alpha2 を与えるとその値を使い、None なら自動選択する。

    angle_shift は alpha0, beta2, alpha2 に共通に加える角度。曲線は変わらない。
    """
    settings = settings or get_settings()
    h = inp.h
    cc = cc_interpolant(inp.p_i, inp.p_f, 2.0 * h * inp.v_i, 2.0 * h * inp.v_f, settings)
    reference = split_to_biarc(cc)

    A0, B2 = reference.A0H, reference.B2H
    d_i = quat.pure(0.25 * h * (h * inp.w_i + 4.0 * inp.v_i))
    if a1 is None:
        a1 = compute_a1(A0, reference.A1H)
    A1 = -quat.mul(quat.mul(d_i + a1 * quat.ONE, A0), quat.I) / float(quat.inner4(A0, A0))
    G = A0 - 8.0 * A1 + 7.0 * B2
    c = (inp.p_f - inp.p_i) - h * (inp.v_f + inp.v_i) / 5.0 - (h * h * inp.w_i + 4.0 * h * inp.v_i) / 20.0
    b = 0.75 * c - 0.2 * quat.vector(quat.sandwich_i(A1)) + 3.0 / 40.0 * quat.symmetric_i(A1, B2) \
        + quat.vector(quat.sandwich_i(G)) / 1600.0

    degenerate_b = float(np.linalg.norm(b)) < settings.degenerate_b_tol * inp.scale
    degenerate_alpha2 = False
    if degenerate_b:
        logger.debug("|b| = %.3e が許容値未満のため A_2 = -G/40 とします。", np.linalg.norm(b))
        q = quat.ZERO
        f1 = f2 = 0.0
        alpha2 = 0.0
    else:
        q = solve_axis_quadratic(b, 0.0, settings)
        selected, f1, f2, degenerate_alpha2 = compute_alpha2(G, q, reference.A2H)
        if alpha2 is None:
            alpha2 = selected

    shift = quat.exp_i(angle_shift)
    if angle_shift != 0.0:
        A0, A1, B2, G = (quat.mul(x, shift) for x in (A0, A1, B2, G))
    A2 = -G / 40.0
    if not degenerate_b:
        A2 = A2 + quat.mul(q, quat.exp_i(alpha2 + angle_shift))
    B0 = A2
    B1 = 2.0 * A2 - A1

    u_m = inp.u_m
    left = make_arc(PreImage(c0=A0, c1=A1, c2=A2), inp.p_i, inp.u_i, u_m)
    right = make_arc(PreImage(c0=B0, c1=B1, c2=B2), inp.p_f, u_m, inp.u_f, anchor_end=True)
    logger.debug("バイアーク [%g, %g]: a1=%.6g alpha2=%.6g |b|=%.3e phi0=%.6g phi2=%.6g",
                 inp.u_i, inp.u_f, a1, alpha2, np.linalg.norm(b), cc.phi0, cc.phi2)
    return BiarcSolution(
        left=left, right=right,
        A0=A0, A1=A1, A2=A2, B0=B0, B1=B1, B2=B2,
        a1=a1, alpha2=alpha2, d_i=d_i, G=G, c=c, b=b, q=q, f1=f1, f2=f2,
        phi0=cc.phi0, phi2=cc.phi2, angle_shift=angle_shift,
        degenerate_b=degenerate_b, degenerate_alpha2=degenerate_alpha2,
    )


def solve_biarc(inp: HermiteInput, settings: Optional[SolverSettings] = None) -> BiarcSolution:
    """自由パラメータを自動選択した C^2 PH 五次バイアーク。"""
    return solve_biarc_with_parameters(inp, settings=settings)


def solve_biarc_with_angles(inp: HermiteInput, alpha0_shift: float,
                            settings: Optional[SolverSettings] = None) -> BiarcSolution:
    """alpha0, beta2, alpha2 を alpha0_shift だけずらした解。同じ曲線になる。"""
    return solve_biarc_with_parameters(inp, angle_shift=alpha0_shift, settings=settings)


def biarc_residuals(inp: HermiteInput, solution: BiarcSolution) -> Dict[str, float]:
    """補間条件と中点での C^2 接続の残差 (scale で割った相対値)。"""
    left, right = solution.left, solution.right
    u_m = inp.u_m
    scale = inp.scale
    h = inp.h
    return {
        "position_start": float(np.linalg.norm(evaluate(left, inp.u_i) - inp.p_i)) / scale,
        "position_end": float(np.linalg.norm(evaluate(right, inp.u_f) - inp.p_f)) / scale,
        "first_start": h * float(np.linalg.norm(derivative(left, inp.u_i, 1) - inp.v_i)) / scale,
        "first_end": h * float(np.linalg.norm(derivative(right, inp.u_f, 1) - inp.v_f)) / scale,
        "second_start": h * h * float(np.linalg.norm(derivative(left, inp.u_i, 2) - inp.w_i)) / scale,
        "joint_position": float(np.linalg.norm(evaluate(left, u_m) - evaluate(right, u_m))) / scale,
        "joint_first": h * float(np.linalg.norm(derivative(left, u_m, 1) - derivative(right, u_m, 1))) / scale,
        "joint_second": h * h * float(np.linalg.norm(derivative(left, u_m, 2) - derivative(right, u_m, 2))) / scale,
    }
