from typing import Optional


class PHSplineError(Exception):
    """ライブラリが送出する例外の基底クラス。"""


class DegenerateInputError(PHSplineError):
    """ゼロ微分・ゼロ変位など、幾何的に退化した入力。"""


class ZeroChordError(DegenerateInputError):
    """連続する2点が一致し、弦長パラメータが増加しない。"""


class InvalidRotationError(PHSplineError):
    """単位四元数でない四元数で回転しようとした。"""


class OutOfRangeError(PHSplineError):
    """パラメータが区間の外にある。"""


class SingularPointError(PHSplineError):
    """一階微分が消える点で曲率を評価しようとした。"""


class KnotOrderError(PHSplineError):
    """ノット列が狭義単調増加でない。"""


class InputParseError(PHSplineError):
    """入力ファイルの書式エラー。行番号を保持する。"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SolverError(PHSplineError):
    """セグメント構築の失敗。どのセグメントで起きたかを保持する。"""

    def __init__(self, message: str, segment: Optional[int] = None):
        self.segment = segment
        if segment is not None:
            message = f"segment {segment}: {message}"
        super().__init__(message)
