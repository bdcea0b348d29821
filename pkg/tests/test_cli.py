import json

import numpy as np
import pytest

from src.cli import EXIT_IO, EXIT_OK, EXIT_PARSE, EXIT_SOLVER, main
from src.config import SolverSettings, load_settings
from src.io import read_spline_json


@pytest.fixture
def points_file(tmp_path):
    path = tmp_path / "points.txt"
    path.write_text("0 0 0\n-5 5 2\n0 10 -2\n8 12 5\n15 2 3\n2 0 7\n")
    return path


def test_interpolate_hermite_two_records(tmp_path):
    source = tmp_path / "hermite.txt"
    source.write_text("0.0 0 0 0 1 0 0\n1.5 1 1 0 0 1 0\n")
    out_json, out_csv = tmp_path / "spline.json", tmp_path / "samples.csv"
    code = main(["interpolate", "--mode", "hermite", "--in", str(source), "--out-json", str(out_json),
                 "--out-csv", str(out_csv), "--samples", "11"])
    assert code == EXIT_OK
    spline = read_spline_json(out_json)
    assert [s.kind for s in spline.segments] == ["single-arc"]
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "u,x,y,z" and len(lines) == 12


def test_interpolate_points_and_eval(points_file, tmp_path, capsys):
    out_json = tmp_path / "spline.json"
    assert main(["interpolate", "--mode", "points", "--in", str(points_file), "--out-json", str(out_json)]) == EXIT_OK
    capsys.readouterr()
    assert main(["eval", "--in-json", str(out_json), "--at", "0"]) == EXIT_OK
    result = json.loads(capsys.readouterr().out)
    assert np.allclose(result["point"], [0.0, 0.0, 0.0], atol=1e-15)
    assert result["curvature"] >= 0.0


def test_duplicate_points_exit_code(tmp_path, capsys):
    source = tmp_path / "dup.txt"
    source.write_text("0 0 0\n1 0 0\n1 0 0\n")
    assert main(["interpolate", "--mode", "points", "--in", str(source)]) == EXIT_SOLVER
    assert "line 3" in capsys.readouterr().err


def test_parse_error_exit_code(tmp_path, capsys):
    source = tmp_path / "bad.txt"
    source.write_text("0 0 0\n1 x 0\n")
    assert main(["interpolate", "--mode", "points", "--in", str(source)]) == EXIT_PARSE
    assert "line 2" in capsys.readouterr().err


def test_missing_file_exit_code(tmp_path):
    assert main(["interpolate", "--mode", "points", "--in", str(tmp_path / "none.txt")]) == EXIT_IO


def test_bad_arguments_exit_code():
    assert main(["convergence", "--curve", "spiral"]) == EXIT_PARSE
    assert main(["convergence", "--curve", "helix", "--kmin", "4", "--kmax", "2"]) == EXIT_PARSE


def test_eval_out_of_range(points_file, tmp_path):
    out_json = tmp_path / "spline.json"
    main(["interpolate", "--mode", "points", "--in", str(points_file), "--out-json", str(out_json)])
    assert main(["eval", "--in-json", str(out_json), "--at", "1000"]) == EXIT_SOLVER


def test_convergence_csv(tmp_path):
    out = tmp_path / "table.csv"
    assert main(["convergence", "--curve", "zerocurv", "--kmax", "2", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "curve,k,N,e_k,p_k"
    assert lines[1].startswith("zerocurv,0,1,") and lines[1].endswith(",")
    assert len(lines) == 4


def test_family_and_demo(tmp_path):
    assert main(["family", "--out", str(tmp_path / "family.csv"), "--samples", "5"]) == EXIT_OK
    rows = (tmp_path / "family.csv").read_text().splitlines()
    assert rows[0] == "family,value,u,x,y,z"
    assert len(rows) == 1 + 21 * 5
    assert main(["demo-stream", "--outdir", str(tmp_path / "demo"), "--samples", "51"]) == EXIT_OK
    assert (tmp_path / "demo" / "cc_curvature.csv").is_file()


def test_config_file(tmp_path):
    config = tmp_path / "settings.env"
    config.write_text("PHSPLINE_CC_GRID_SIZE=32\nPHSPLINE_INNER_ESTIMATOR=literal\nOTHER=1\n")
    settings = load_settings(config)
    assert settings == SolverSettings(cc_grid_size=32, inner_estimator="literal")
    with pytest.raises(FileNotFoundError):
        load_settings(tmp_path / "missing.env")


def test_bad_config_exit_code(tmp_path, points_file):
    config = tmp_path / "settings.env"
    config.write_text("PHSPLINE_CC_GRID_SIZE=-1\n")
    assert main(["--config", str(config), "interpolate", "--mode", "points", "--in", str(points_file)]) == EXIT_PARSE
