"""
四元数代数。

四元数は成分順 (w, x, y, z) の float64 配列で表す。すべての演算は末尾軸が
長さ 4 (ベクトルは 3) の配列に対してベクトル化されており、先頭軸はブロードキャストされる。
"""
from typing import Optional

import numpy as np

from .config import get_settings
from .errors import InvalidRotationError

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])
ZERO = np.zeros(4)


def quaternion(w: float, x: float = 0.0, y: float = 0.0, z: float = 0.0) -> np.ndarray:
    return np.array([w, x, y, z], dtype=float)


def pure(v) -> np.ndarray:
    """3次元ベクトルをスカラー部 0 の四元数にする。"""
    v = np.asarray(v, dtype=float)
    return np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)


def scalar(q: np.ndarray) -> np.ndarray:
    return np.asarray(q)[..., 0]


def vector(q: np.ndarray) -> np.ndarray:
    return np.asarray(q)[..., 1:]


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    ハミルトン積 AB = (a0 b0 - a.b) + (a0 b + b0 a + a x b)。非可換。
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a0, av = a[..., :1], a[..., 1:]
    b0, bv = b[..., :1], b[..., 1:]
    w = a0 * b0 - np.sum(av * bv, axis=-1, keepdims=True)
    v = a0 * bv + b0 * av + np.cross(av, bv)
    return np.concatenate([w, v], axis=-1)


def conjugate(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def inner4(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """4次元ユークリッド内積。a b* のスカラー部に等しい。"""
    return np.sum(np.asarray(a, dtype=float) * np.asarray(b, dtype=float), axis=-1)


def modulus(q: np.ndarray) -> np.ndarray:
    return np.sqrt(inner4(q, q))


def exp_i(theta) -> np.ndarray:
    """cos(theta) + i sin(theta)"""
    theta = np.asarray(theta, dtype=float)
    zeros = np.zeros_like(theta)
    return np.stack([np.cos(theta), np.sin(theta), zeros, zeros], axis=-1)


def sandwich_i(a: np.ndarray, b: Optional[np.ndarray] = None) -> np.ndarray:
    """a i b* を返す。b を省略すると a i a*。"""
    if b is None:
        b = a
    return mul(mul(a, I), conjugate(b))


def symmetric_i(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """a i b* + b i a* のベクトル部 (スカラー部は恒等的に 0)。"""
    return 2.0 * vector(sandwich_i(a, b))


def rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """
    単位四元数 q でベクトル v を回転する (q v q* のベクトル部)。

    Raises:
        InvalidRotationError: q が単位四元数でない場合。
    """
    tol = get_settings().unit_tol
    q = np.asarray(q, dtype=float)
    norm = modulus(q)
    if np.any(np.abs(1.0 - norm) >= tol):
        raise InvalidRotationError(f"回転には単位四元数が必要です: |q| = {norm}")
    rotated = mul(mul(q, pure(v)), conjugate(q))
    assert np.all(np.abs(scalar(rotated)) <= 1e-12 * (1.0 + np.linalg.norm(v, axis=-1)))
    return vector(rotated)


def rotation_matrix(q: np.ndarray) -> np.ndarray:
    """単位四元数 q に対応する 3x3 回転行列。"""
    w, x, y, z = np.asarray(q, dtype=float)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])
