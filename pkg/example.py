import argparse
import logging

import numpy as np

from src.biarc import biarc_residuals, solve_biarc
from src.flow import FIGURE_INPUT, ConvergenceFlow, StreamDemoFlow
from src.phcore import arc_length

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')


def show_biarc():
    solution = solve_biarc(FIGURE_INPUT)
    print("a1 =", solution.a1, "alpha2 =", solution.alpha2)
    for name, arc in zip(("left", "right"), solution.arcs):
        print(name, "control points:")
        print(arc.control_points.points)
        print(name, "length:", arc_length(arc, arc.u_start, arc.u_end))
    print("residuals:", biarc_residuals(FIGURE_INPUT, solution))


def show_convergence(curve: str, kmax: int):
    rows = ConvergenceFlow.run(curve, 0, kmax)
    for row in rows:
        print(row.k, row.N, f"{row.e_k:.4e}", "" if row.p_k is None else f"{row.p_k:.2f}")


def show_stream():
    spline = StreamDemoFlow.build()
    print(len(spline.segments), "segments:", [segment.kind for segment in spline.segments])
    knots = np.array(spline.knots)
    print("knots:", knots)
    print("curvature at knots:", spline.curvature(knots))


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--curve", default="helix", choices=["helix", "torus", "lissajous", "zerocurv"])
    parser.add_argument("--kmax", type=int, default=5)
    args = parser.parse_args()
    show_biarc()
    show_convergence(args.curve, args.kmax)
    show_stream()
