import math
from pathlib import Path
from typing import Literal, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field

ENV_PREFIX = "PHSPLINE_"


class SolverSettings(BaseModel):
    """数値計算の調整値。既定値はすべての実験で使う値そのもの。"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    cc_grid_size: int = Field(default=64, ge=4, description="CC 角度選択の一様グリッドの分割数 (片軸)")
    cc_simplex_scale: float = Field(default=2 * math.pi / 128, gt=0, description="Nelder-Mead 初期シンプレックスの辺長")
    cc_xatol: float = Field(default=1e-5, gt=0, description="Nelder-Mead の角度収束判定")
    cc_fatol: float = Field(default=1e-12, gt=0, description="Nelder-Mead の目的関数減少の収束判定 (目的関数スケールに対する相対値)")
    cc_maxiter: int = Field(default=400, ge=10, description="Nelder-Mead の最大反復回数")
    cc_polish_xtol: float = Field(default=1e-12, gt=0, description="Newton 法の角度更新量の収束判定")
    cc_polish_maxiter: int = Field(default=30, ge=1, description="Newton 法の最大反復回数")
    cc_gtol: float = Field(default=1e-13, gt=0, description="勾配 (目的関数スケールに対する相対値) がこれ以下なら Newton 法を省略する")
    antiparallel_tol: float = Field(default=1e-9, gt=0, description="|i + r/|r|| がこれ未満なら軸退化の分岐を使う")
    unit_tol: float = Field(default=1e-12, gt=0, description="回転に使う四元数の単位性の許容誤差")
    degenerate_b_tol: float = Field(default=1e-14, gt=0, description="|b| < tol * scale で b 退化の分岐を使う")
    inner_estimator: Literal["cubic", "literal"] = Field(default="cubic", description="点列モードの内部微分推定式")
    sample_count: int = Field(default=2 ** 12 + 1, ge=2, description="誤差評価のサンプル数")


_default_settings = SolverSettings()


def get_settings() -> SolverSettings:
    return _default_settings


def load_settings(path: Optional[Union[str, Path]] = None) -> SolverSettings:
    """
    dotenv 形式の設定ファイルから SolverSettings を読み込む。

    キーは ``PHSPLINE_<FIELD>`` (大文字小文字を区別しない)。環境変数は参照しない。
    path が None なら既定値を返す。
    """
    if path is None:
        return _default_settings
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"設定ファイル '{path}' が見つかりません。")
    values = dotenv_values(path)
    overrides = {}
    for key, value in values.items():
        if value is None or not key.upper().startswith(ENV_PREFIX):
            continue
        overrides[key[len(ENV_PREFIX):].lower()] = value
    return SolverSettings(**overrides)
