from abc import ABC, abstractmethod
from typing import Annotated, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, PlainValidator, WithJsonSchema, model_validator

from .errors import DegenerateInputError, OutOfRangeError


def _array_validator(shape: Tuple[int, ...]):
    def validate(value) -> np.ndarray:
        array = np.array(value, dtype=float)
        if array.shape != shape:
            raise ValueError(f"shape {shape} の配列が必要です: {array.shape}")
        if not np.all(np.isfinite(array)):
            raise ValueError(f"有限でない値が含まれています: {array}")
        array.flags.writeable = False
        return array
    return validate


def _array_type(shape: Tuple[int, ...], description: str):
    schema = {"type": "array", "items": {"type": "number"}, "description": description}
    if len(shape) == 2:
        schema = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}, "description": description}
    return Annotated[
        np.ndarray,
        PlainValidator(_array_validator(shape)),
        PlainSerializer(lambda a: a.tolist(), return_type=list),
        WithJsonSchema(schema),
    ]


Quaternion = _array_type((4,), "quaternion (w, x, y, z)")
Vector3 = _array_type((3,), "3D point or vector (x, y, z)")
Points6 = _array_type((6, 3), "six Bezier control points")


class FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class PreImage(FrozenModel):
    """二次四元数多項式 A(xi) = sum c_j B_j^2(xi) (xi in [0, 1])。"""
    c0: Quaternion = Field(description="Bernstein 係数 0")
    c1: Quaternion = Field(description="Bernstein 係数 1")
    c2: Quaternion = Field(description="Bernstein 係数 2")

    @property
    def coefficients(self) -> np.ndarray:
        return np.stack([self.c0, self.c1, self.c2])


class ControlPolygon(FrozenModel):
    """PH 五次曲線の Bezier 制御点 p0..p5。"""
    points: Points6 = Field(description="制御点 (6, 3)")

    def __getitem__(self, index: int) -> np.ndarray:
        return self.points[index]

    @property
    def p0(self) -> np.ndarray:
        return self.points[0]

    @property
    def p5(self) -> np.ndarray:
        return self.points[5]


class PHQuinticArc(FrozenModel):
    """
    プリイメージとアンカー点で決まる PH 五次曲線の一区間。

    局所パラメータ xi = (u - u_start) / (u_end - u_start) で評価する。
    """
    preimage: PreImage = Field(description="局所パラメータでのプリイメージ")
    anchor: Vector3 = Field(description="アンカー点")
    anchor_end: bool = Field(default=False, description="True ならアンカーは終点、False なら始点")
    u_start: float = Field(description="大域パラメータの始点")
    u_end: float = Field(description="大域パラメータの終点")
    control_points: ControlPolygon = Field(description="制御点")

    @model_validator(mode="after")
    def _check_interval(self):
        if not self.u_end > self.u_start:
            raise OutOfRangeError(f"区間が空です: [{self.u_start}, {self.u_end}]")
        return self

    @property
    def length(self) -> float:
        """大域パラメータ区間の長さ h_loc。"""
        return self.u_end - self.u_start

    def local(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        span = 1e-14 * max(1.0, abs(self.u_start), abs(self.u_end))
        if np.any(u < self.u_start - span) or np.any(u > self.u_end + span):
            raise OutOfRangeError(f"u = {u} は区間 [{self.u_start}, {self.u_end}] の外です。")
        return np.clip((u - self.u_start) / self.length, 0.0, 1.0)


class CCInterpolant(FrozenModel):
    """一階 Hermite データを補間する CC PH 五次曲線 (t in [0, 1])。"""
    preimage: PreImage = Field(description="t に関するプリイメージ V^H")
    start: Vector3 = Field(description="始点 p_i")
    end: Vector3 = Field(description="終点 p_f")
    phi0: float = Field(description="V_0 の角度")
    phi2: float = Field(description="V_2 の角度")
    objective_value: float = Field(description="選択時の目的関数値")


class BiarcFormCoefficients(FrozenModel):
    """CC 曲線を t = 1/2 で二分したときのプリイメージ係数。"""
    A0H: Quaternion
    A1H: Quaternion
    A2H: Quaternion
    B0H: Quaternion
    B1H: Quaternion
    B2H: Quaternion


class HermiteInput(FrozenModel):
    """二階 Hermite 補間問題 (左端の二階微分つき)。微分は大域パラメータ u に関するもの。"""
    p_i: Vector3 = Field(description="始点")
    p_f: Vector3 = Field(description="終点")
    v_i: Vector3 = Field(description="始点の一階微分")
    v_f: Vector3 = Field(description="終点の一階微分")
    w_i: Vector3 = Field(description="始点の二階微分")
    u_i: float = Field(default=0.0, description="始点の大域パラメータ")
    u_f: float = Field(default=1.0, description="終点の大域パラメータ")

    @model_validator(mode="after")
    def _check_data(self):
        if not self.u_f > self.u_i:
            raise DegenerateInputError(f"u_f > u_i が必要です: u_i = {self.u_i}, u_f = {self.u_f}")
        if np.linalg.norm(self.v_i) == 0.0 or np.linalg.norm(self.v_f) == 0.0:
            raise DegenerateInputError("端点の一階微分がゼロです。")
        return self

    @property
    def h(self) -> float:
        return 0.5 * (self.u_f - self.u_i)

    @property
    def u_m(self) -> float:
        return 0.5 * (self.u_i + self.u_f)

    @property
    def scale(self) -> float:
        h = self.h
        return max(
            float(np.linalg.norm(self.p_f - self.p_i)),
            h * float(np.linalg.norm(self.v_i)),
            h * float(np.linalg.norm(self.v_f)),
            h * h * float(np.linalg.norm(self.w_i)),
        )


class BiarcSolution(FrozenModel):
    """C^2 PH 五次バイアークと、パラメータ選択の診断値。"""
    left: PHQuinticArc
    right: PHQuinticArc
    A0: Quaternion
    A1: Quaternion
    A2: Quaternion
    B0: Quaternion
    B1: Quaternion
    B2: Quaternion
    a1: float = Field(description="A_1 の実数自由パラメータ")
    alpha2: float = Field(description="A_2 の角度自由パラメータ")
    d_i: Quaternion = Field(description="(h/4)(h w_i + 4 v_i) (純ベクトル四元数)")
    G: Quaternion = Field(description="A_0 - 8 A_1 + 7 B_2")
    c: Vector3
    b: Vector3
    q: Quaternion
    f1: float
    f2: float
    phi0: float = Field(description="参照 CC 曲線の角度 phi0")
    phi2: float = Field(description="参照 CC 曲線の角度 phi2")
    angle_shift: float = Field(default=0.0, description="alpha0, beta2, alpha2 に加えた共通の角度")
    degenerate_b: bool = Field(default=False, description="|b| が許容値未満で A_2 = -G/40 とした")
    degenerate_alpha2: bool = Field(default=False, description="f1 = f2 = 0 で alpha2 = 0 とした")

    @property
    def arcs(self) -> List[PHQuinticArc]:
        return [self.left, self.right]


class SplineSegmentRecord(FrozenModel):
    """ストリームから出力された1セグメント。"""
    kind: Literal["single-arc", "biarc"]
    arcs: List[PHQuinticArc] = Field(description="1 個 (single-arc) または 2 個 (biarc) の弧")
    source: Tuple[int, int] = Field(description="データ点のインデックス (j-1, j)")

    @property
    def u_start(self) -> float:
        return self.arcs[0].u_start

    @property
    def u_end(self) -> float:
        return self.arcs[-1].u_end


class ConvergenceRow(FrozenModel):
    """収束実験の1行。"""
    curve: str
    k: int = Field(ge=0, description="細分レベル")
    N: int = Field(description="セグメント数 2^k")
    e_k: float = Field(description="最大偏差")
    p_k: Optional[float] = Field(default=None, description="観測次数 log2(e_{k-1}/e_k)")


class ArcDocument(BaseModel):
    u_start: float
    u_end: float
    preimage: List[List[float]]
    anchor: List[float]
    anchor_end: bool = False
    control_points: List[List[float]]


class SegmentDocument(BaseModel):
    kind: Literal["single-arc", "biarc"]
    arcs: List[ArcDocument]


class SplineDocument(BaseModel):
    """スプライン JSON のスキーマ。"""
    mode: str
    knots: List[float]
    segments: List[SegmentDocument]


class AnalyticCurve(ABC):
    """
    閉じた式で評価できる解析曲線。収束実験のデータ源。
    """
    name: str

    @property
    @abstractmethod
    def domain(self) -> Tuple[float, float]:
        """パラメータ区間 [0, U]"""
        pass

    @abstractmethod
    def evaluate(self, u, order: int = 0) -> np.ndarray:
        """
        u (スカラーまたは配列) における order 階微分を返す。戻り値の末尾軸は長さ 3。
        """
        pass


class DerivativeEstimator(ABC):
    """
    点列ストリームの端点微分を局所的に推定するインターフェース。
    """
    @abstractmethod
    def inner(self, p_prev, v_prev, p_cur, p_next, u_prev: float, u_cur: float, u_next: float) -> np.ndarray:
        pass

    @abstractmethod
    def start(self, p0, p1, p2, u0: float, u1: float, u2: float) -> np.ndarray:
        pass

    @abstractmethod
    def end(self, p_prev, v_prev, p_last, u_prev: float, u_last: float) -> np.ndarray:
        pass
