import math
from typing import Dict, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from .errors import OutOfRangeError
from .type import AnalyticCurve


class _BoundedCurve(AnalyticCurve):
    upper: float

    @property
    def domain(self) -> Tuple[float, float]:
        return 0.0, self.upper

    def evaluate(self, u, order: int = 0) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        span = 1e-12 * max(1.0, self.upper)
        if np.any(u < -span) or np.any(u > self.upper + span):
            raise OutOfRangeError(f"{self.name}: u = {u} は [0, {self.upper}] の外です。")
        if order not in (0, 1, 2):
            raise ValueError(f"order は 0, 1, 2 のいずれかです: {order}")
        return np.stack(self._components(u, order), axis=-1)

    def _components(self, u: np.ndarray, order: int):
        raise NotImplementedError


class Helix(_BoundedCurve):
    """弧長パラメータの円柱螺旋 (半径 10, ピッチ係数 2)。"""
    name = "helix"
    u_h = math.sqrt(104.0)
    upper = 3.6 * math.pi * math.sqrt(104.0)

    def _components(self, u, order):
        a = u / self.u_h
        k = 1.0 / self.u_h
        if order == 0:
            return 10.0 * np.sin(a), 10.0 * np.cos(a), -2.0 * a
        if order == 1:
            return 10.0 * k * np.cos(a), -10.0 * k * np.sin(a), np.full_like(a, -2.0 * k)
        return -10.0 * k * k * np.sin(a), -10.0 * k * k * np.cos(a), np.zeros_like(a)


class Torus(_BoundedCurve):
    """トーラス上の閉曲線。"""
    name = "torus"
    upper = 2.0 * math.pi

    def _components(self, u, order):
        radius = (20.0 + 10.0 * np.cos(3.0 * u), -30.0 * np.sin(3.0 * u), -90.0 * np.cos(3.0 * u))
        c, s = np.cos(0.75 * u), np.sin(0.75 * u)
        if order == 0:
            return radius[0] * c, radius[0] * s, 10.0 * np.sin(3.0 * u)
        if order == 1:
            return (radius[1] * c - 0.75 * radius[0] * s,
                    radius[1] * s + 0.75 * radius[0] * c,
                    30.0 * np.cos(3.0 * u))
        return (radius[2] * c - 1.5 * radius[1] * s - 0.5625 * radius[0] * c,
                radius[2] * s + 1.5 * radius[1] * c - 0.5625 * radius[0] * s,
                -90.0 * np.sin(3.0 * u))


class Lissajous(_BoundedCurve):
    name = "lissajous"
    u_l = math.pi / 4.0
    upper = math.pi / 2.0

    def _components(self, u, order):
        a = u - self.u_l
        if order == 0:
            return np.cos(3.0 * a), np.sin(2.0 * a), np.sin(7.0 * a)
        if order == 1:
            return -3.0 * np.sin(3.0 * a), 2.0 * np.cos(2.0 * a), 7.0 * np.cos(7.0 * a)
        return -9.0 * np.cos(3.0 * a), -4.0 * np.sin(2.0 * a), -49.0 * np.sin(7.0 * a)


class ZeroCurvature(_BoundedCurve):
    """u = 10 で曲率がゼロになる多項式曲線。"""
    name = "zerocurv"
    upper = 10.0
    polynomials = (
        Polynomial([1, 1, 0, 0, 1, 0, -1, 0, 1]),
        Polynomial([-4, 2, 0, 0, 0, 1, 0, -1, 0, 1]),
        Polynomial([2, -3, 0, 1, 0, 0, 0, 0, 0, 0, -1]),
    )

    def _components(self, u, order):
        z = (u - 10.0) / 10.0
        return tuple(poly.deriv(order)(z) / 10.0 ** order for poly in self.polynomials)


CURVES: Dict[str, AnalyticCurve] = {curve.name: curve for curve in (Helix(), Torus(), Lissajous(), ZeroCurvature())}


def get_curve(name: str) -> AnalyticCurve:
    try:
        return CURVES[name]
    except KeyError:
        raise KeyError(f"未知の曲線です: '{name}' (候補: {', '.join(CURVES)})") from None


def analytic_eval(name: str, u, order: int = 0) -> np.ndarray:
    return get_curve(name).evaluate(u, order)
