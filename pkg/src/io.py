"""
入力テキストの読み込みと、スプライン JSON / CSV の書き出し。
"""
import csv
import json
import logging
import math
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InputParseError
from .phcore import make_arc
from .stream import Spline
from .type import ArcDocument, PreImage, SegmentDocument, SplineDocument, SplineSegmentRecord

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
HermiteRecord = Tuple[Optional[float], np.ndarray, np.ndarray]


def _parse_numbers(fields: List[str], line: int) -> List[float]:
    values = []
    for field in fields:
        try:
            value = float(field)
        except ValueError:
            raise InputParseError(f"数値として読めません: '{field}'", line=line) from None
        if not math.isfinite(value):
            raise InputParseError(f"有限でない値です: '{field}'", line=line)
        values.append(value)
    return values


def _records(text: str) -> Iterable[Tuple[int, List[str]]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield number, body.split()


def parse_hermite_text(text: str) -> List[Tuple[int, HermiteRecord]]:
    """
    Hermite 形式 ``[u] px py pz vx vy vz`` を読む。u の有無はファイル内で揃っている必要がある。

    Returns:
        (行番号, (u または None, p, v)) のリスト
    """
    records = []
    with_u: Optional[bool] = None
    for line, fields in _records(text):
        if len(fields) not in (6, 7):
            raise InputParseError(f"6 個または 7 個の数値が必要です: {len(fields)} 個", line=line)
        has_u = len(fields) == 7
        if with_u is None:
            with_u = has_u
        elif with_u != has_u:
            raise InputParseError("パラメータ u の有無が前の行と異なります。", line=line)
        values = _parse_numbers(fields, line)
        u = values.pop(0) if has_u else None
        records.append((line, (u, np.array(values[:3]), np.array(values[3:]))))
    return records


def parse_points_text(text: str) -> List[Tuple[int, np.ndarray]]:
    """点列形式 ``px py pz`` を読む。"""
    records = []
    for line, fields in _records(text):
        if len(fields) != 3:
            raise InputParseError(f"3 個の数値が必要です: {len(fields)} 個", line=line)
        records.append((line, np.array(_parse_numbers(fields, line))))
    return records


def read_text(path: PathLike) -> str:
    try:
        with open(path, "r", encoding="utf-8") as file:
            return file.read()
    except FileNotFoundError:
        raise FileNotFoundError(f"ファイル '{path}' が見つかりません。")
    except IOError as e:
        raise IOError(f"ファイル '{path}' の読み込みに失敗しました: {e}") from e


def write_text(path: PathLike, content: str) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as file:
            file.write(content)
    except IOError as e:
        raise IOError(f"ファイル '{path}' の書き込みに失敗しました: {e}") from e


def spline_to_document(spline: Spline) -> SplineDocument:
    segments = []
    for segment in spline.segments:
        arcs = [
            ArcDocument(
                u_start=arc.u_start,
                u_end=arc.u_end,
                preimage=arc.preimage.coefficients.tolist(),
                anchor=arc.anchor.tolist(),
                anchor_end=arc.anchor_end,
                control_points=arc.control_points.points.tolist(),
            )
            for arc in segment.arcs
        ]
        segments.append(SegmentDocument(kind=segment.kind, arcs=arcs))
    return SplineDocument(mode=spline.mode, knots=list(spline.knots), segments=segments)


def document_to_spline(document: SplineDocument) -> Spline:
    """JSON 文書からスプラインを復元する。制御点はプリイメージとアンカーから計算し直す。"""
    segments = []
    for j, segment in enumerate(document.segments):
        arcs = []
        for arc in segment.arcs:
            c0, c1, c2 = arc.preimage
            arcs.append(make_arc(PreImage(c0=c0, c1=c1, c2=c2), np.array(arc.anchor),
                                 arc.u_start, arc.u_end, anchor_end=arc.anchor_end))
        segments.append(SplineSegmentRecord(kind=segment.kind, arcs=arcs, source=(j, j + 1)))
    return Spline(mode=document.mode, knots=document.knots, segments=segments)


def write_spline_json(spline: Spline, path: PathLike) -> None:
    # json.dumps は float を最短の往復可能な repr で書く
    content = json.dumps(spline_to_document(spline).model_dump(mode="json"), indent=1)
    write_text(path, content + "\n")
    logger.info("スプライン JSON を書き出しました: %s (%d セグメント)", path, len(spline.segments))


def read_spline_json(path: PathLike) -> Spline:
    try:
        data = json.loads(read_text(path))
    except json.JSONDecodeError as e:
        raise InputParseError(f"JSON を解析できません: {e.msg}", line=e.lineno) from e
    return document_to_spline(SplineDocument.model_validate(data))


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as file:
            writer = csv.writer(file)
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    except IOError as e:
        raise IOError(f"ファイル '{path}' の書き込みに失敗しました: {e}") from e


def sample_rows(spline: Spline, count: int) -> List[List[float]]:
    """u, x, y, z の一様サンプル。"""
    lo, hi = spline.domain
    u = np.linspace(lo, hi, count)
    points = spline.evaluate(u)
    return [[float(t), *map(float, p)] for t, p in zip(u, points)]


def curvature_rows(spline: Spline, count: int) -> List[List[float]]:
    """u, arclength, kappa。一様サンプルにノットを加える。"""
    lo, hi = spline.domain
    u = np.union1d(np.linspace(lo, hi, count), np.array(spline.knots))
    s = spline.arc_length(u)
    kappa = spline.curvature(u)
    return [[float(a), float(b), float(c)] for a, b, c in zip(u, s, kappa)]
