import argparse
import json
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from .config import SolverSettings, load_settings
from .curves import CURVES
from .errors import InputParseError, PHSplineError
from .flow import ConvergenceFlow, InterpolateFlow, ParameterFamilyFlow, StreamDemoFlow
from .io import read_spline_json, write_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SOLVER = 3
EXIT_IO = 4


def convergence(args: argparse.Namespace, settings: SolverSettings) -> None:
    if args.curve == "all":
        rows = ConvergenceFlow.run_all(args.kmin, args.kmax, settings, args.jobs)
    else:
        rows = ConvergenceFlow.run(args.curve, args.kmin, args.kmax, settings, args.jobs)
    table = [[row.curve, row.k, row.N, row.e_k, "" if row.p_k is None else row.p_k] for row in rows]
    if args.out:
        write_csv(args.out, ["curve", "k", "N", "e_k", "p_k"], table)
    for row in rows:
        p_k = "" if row.p_k is None else f"{row.p_k:.2f}"
        print(f"{row.curve:10s} {row.k:2d} {row.N:5d} {row.e_k:.4e} {p_k}")


def interpolate(args: argparse.Namespace, settings: SolverSettings) -> None:
    spline = InterpolateFlow.run(args.input, args.mode, args.out_json, args.out_csv,
                                 scheme=args.scheme, sample_count=args.samples, settings=settings)
    print(f"{len(spline.segments)} segments, u in [{spline.domain[0]!r}, {spline.domain[1]!r}]")


def demo_stream(args: argparse.Namespace, settings: SolverSettings) -> None:
    splines = StreamDemoFlow.run(args.outdir, sample_count=args.samples, settings=settings)
    print(f"{len(splines['biarc'].segments)} segments written to {args.outdir}")


def evaluate(args: argparse.Namespace, settings: SolverSettings) -> None:
    spline = read_spline_json(args.in_json)
    result = {
        "u": args.at,
        "point": spline.evaluate(args.at).tolist(),
        "first": spline.derivative(args.at, 1).tolist(),
        "second": spline.derivative(args.at, 2).tolist(),
        "curvature": float(spline.curvature(args.at)),
    }
    print(json.dumps(result))


def family(args: argparse.Namespace, settings: SolverSettings) -> None:
    ParameterFamilyFlow.write(args.out, sample_count=args.samples, settings=settings)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phspline", description="C^2 PH 五次バイアークスプライン")
    parser.add_argument("--config", help="dotenv 形式の設定ファイル (PHSPLINE_<FIELD>=...)")
    parser.add_argument("-v", "--verbose", action="store_true", help="DEBUG ログを出力する")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convergence", help="解析曲線での収束実験")
    p.add_argument("--curve", choices=[*CURVES, "all"], default="all")
    p.add_argument("--kmin", type=int, default=0)
    p.add_argument("--kmax", type=int, default=9)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="CSV 出力先")
    p.set_defaults(handler=convergence)

    p = sub.add_parser("interpolate", help="入力ファイルからスプラインを作る")
    p.add_argument("--mode", choices=["hermite", "points"], required=True)
    p.add_argument("--scheme", choices=["biarc", "cc"], default="biarc")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-json")
    p.add_argument("--out-csv")
    p.add_argument("--samples", type=int, default=None)
    p.set_defaults(handler=interpolate)

    p = sub.add_parser("demo-stream", help="6 点のストリームデモ")
    p.add_argument("--outdir", required=True)
    p.add_argument("--samples", type=int, default=1001)
    p.set_defaults(handler=demo_stream)

    p = sub.add_parser("eval", help="スプライン JSON を評価する")
    p.add_argument("--in-json", required=True)
    p.add_argument("--at", type=float, required=True)
    p.set_defaults(handler=evaluate)

    p = sub.add_parser("family", help="a1, alpha2 を変えたバイアークの族")
    p.add_argument("--out", required=True)
    p.add_argument("--samples", type=int, default=101)
    p.set_defaults(handler=family)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_PARSE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(asctime)s - %(levelname)s - %(message)s")
    try:
        settings = load_settings(args.config)
        args.handler(args, settings)
    except (InputParseError, ValidationError, ValueError) as e:
        logger.error("入力エラー: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except PHSplineError as e:
        logger.error("計算エラー: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as e:
        logger.error("入出力エラー: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
