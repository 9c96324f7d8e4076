"""Command-line surface: outputs, exit codes and error reporting."""

import json
import logging

import numpy as np
import pytest

from conftest import rigid_image
from src import shapes
from src.cli import (
    EXIT_INPUT_ERROR,
    EXIT_MATH_ERROR,
    EXIT_NOT_CONGRUENT,
    EXIT_OK,
    build_parser,
    run,
)
from src.formats import EXPERIMENT_HEADER, write_curve

FAST = ["--nodes", "512", "--steps", "1024"]


@pytest.fixture
def spiral_file(tmp_path):
    path = tmp_path / "spiral.json"
    write_curve(shapes.log_spiral(), path)
    return str(path)


@pytest.fixture
def circle_file(write_json):
    return write_json("circle.json", {"kind": "circle", "params": {"radius": 2.0}, "n": 1024})


@pytest.fixture
def ellipse_file(write_json):
    return write_json("ellipse.json", {"kind": "ellipse", "params": {"a": 2.0, "b": 1.0}})


class TestSignatureCommand:
    def test_circle_signature_file(self, circle_file, tmp_path):
        out = tmp_path / "sig.csv"

        assert run(["signature", circle_file, "--out", str(out)] + FAST) == EXIT_OK

        lines = out.read_text().splitlines()
        assert lines[0] == "s,k0,k1"
        kappa = np.array([float(line.split(",")[1]) for line in lines[1:]])
        np.testing.assert_allclose(kappa, 0.5, atol=1e-6)

        sidecar = json.loads((tmp_path / "sig.json").read_text())
        assert sidecar["closed"] is True
        assert sidecar["L"] == pytest.approx(4 * np.pi)

    def test_signature_to_stdout(self, circle_file, capsys):
        assert run(["signature", circle_file] + FAST) == EXIT_OK
        assert capsys.readouterr().out.startswith("s,k0,k1\n")

    def test_missing_file(self, tmp_path):
        assert run(["signature", str(tmp_path / "absent.json")]) == EXIT_INPUT_ERROR

    def test_malformed_file(self, write_json, caplog):
        path = write_json("bad.json", {"samples": [[0, 0], [1, 1]]})
        with caplog.at_level(logging.ERROR):
            assert run(["signature", path]) == EXIT_INPUT_ERROR
        assert "CurveFormatError" in caplog.text

    @pytest.mark.parametrize("flag, value", [("--order", "0"), ("--nodes", "-5"), ("--order", "two")])
    def test_bad_counts_are_usage_errors(self, circle_file, flag, value, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["signature", circle_file, flag, value])
        assert exc.value.code == EXIT_INPUT_ERROR
        assert flag in capsys.readouterr().err

    def test_clockwise_curve_has_no_affine_signature(self, write_json, caplog):
        samples = shapes.ellipse().samples[::-1].tolist()
        path = write_json("clockwise.json", {"closed": True, "samples": samples})

        with caplog.at_level(logging.ERROR):
            assert run(["signature", path, "--kind", "affine"] + FAST) == EXIT_MATH_ERROR
        assert "NonConvexArc" in caplog.text


class TestReconstructCommand:
    def test_point_signature_closes(self, tmp_path):
        s = np.linspace(0.0, 2 * np.pi, 64, endpoint=False)
        rows = "\n".join(f"{float(t)!r},1.0,0.0" for t in s)
        (tmp_path / "point.csv").write_text("s,k0,k1\n" + rows + "\n")
        (tmp_path / "point.json").write_text(json.dumps(
            {"kind": "euclidean", "order": 1, "closed": True, "L": 2 * np.pi, "periods": 1}))
        out = tmp_path / "circle.json"

        assert run(["reconstruct", str(tmp_path / "point.csv"), "--out", str(out)] + FAST) == EXIT_OK

        data = json.loads(out.read_text())
        assert data["closed"] is True
        assert data["metadata"]["source"] == "signature"
        assert data["metadata"]["kind"] == "euclidean"

    def test_signature_on_the_axis(self, tmp_path, caplog):
        path = tmp_path / "axis.csv"
        s = np.linspace(0.0, 1.0, 11)
        path.write_text("s,k0,k1\n" + "\n".join(f"{float(t)!r},{float(t)!r},{float(t - 0.5)!r}" for t in s) + "\n")

        with caplog.at_level(logging.ERROR):
            assert run(["reconstruct", str(path)] + FAST) == EXIT_MATH_ERROR
        assert "VertexObstruction" in caplog.text

    def test_curvature_source(self, tmp_path, capsys):
        path = tmp_path / "kappa.csv"
        s = np.linspace(0.0, np.pi, 101)
        path.write_text("s,k0\n" + "\n".join(f"{float(t)!r},1.0" for t in s) + "\n")

        assert run(["reconstruct", str(path), "--source", "curvature"] + FAST) == EXIT_OK

        data = json.loads(capsys.readouterr().out)
        assert data["closed"] is False
        np.testing.assert_allclose(data["samples"][-1], [0.0, 2.0], atol=1e-6)


class TestCompareCommand:
    def test_rigid_image_is_congruent(self, spiral_file, write_json, capsys):
        image = write_json("image.json", {"closed": False,
                                          "samples": rigid_image(shapes.log_spiral()).samples.tolist()})

        assert run(["compare", spiral_file, image]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["congruent"] is True

    def test_fatter_ellipse(self, ellipse_file, write_json, capsys):
        fat = write_json("fat.json", {"kind": "ellipse", "params": {"a": 2.0, "b": 1.1}})

        assert run(["compare", ellipse_file, fat]) == EXIT_NOT_CONGRUENT
        assert json.loads(capsys.readouterr().out)["congruent"] is False

    def test_closed_flag_needs_closed_curves(self, spiral_file, ellipse_file, caplog):
        with caplog.at_level(logging.ERROR):
            assert run(["compare", spiral_file, ellipse_file, "--closed"]) == EXIT_INPUT_ERROR
        assert "--closed" in caplog.text

    def test_negative_threshold_is_a_usage_error(self, spiral_file):
        with pytest.raises(SystemExit) as exc:
            run(["compare", spiral_file, spiral_file, "--threshold", "-1"])
        assert exc.value.code == EXIT_INPUT_ERROR


class TestExperimentCommand:
    def test_zero_trials_give_a_header(self, spiral_file, tmp_path):
        out = tmp_path / "table.csv"
        assert run(["experiment", spiral_file, "--trials", "0", "--sweep", "1e-3", "--out", str(out)] + FAST) == EXIT_OK
        assert out.read_text() == ",".join(EXPERIMENT_HEADER) + "\n"

    def test_reruns_are_identical(self, spiral_file, tmp_path):
        outputs = []
        for name in ("first.csv", "second.csv"):
            out = tmp_path / name
            argv = ["experiment", spiral_file, "--trials", "2", "--sweep", "1e-3", "--seed", "3",
                    "--out", str(out)] + FAST
            assert run(argv) == EXIT_OK
            outputs.append(out.read_bytes())

        assert outputs[0] == outputs[1]
        assert len(outputs[0].splitlines()) == 3

    def test_bound_reports(self, spiral_file, tmp_path):
        bounds = tmp_path / "bounds.json"
        argv = ["experiment", spiral_file, "--trials", "0", "--sweep", "1e-3,1e-4",
                "--out", str(tmp_path / "t.csv"), "--bound-out", str(bounds)] + FAST

        assert run(argv) == EXIT_OK
        reports = json.loads(bounds.read_text())
        assert [r["delta"] for r in reports] == [1e-3, 1e-4]

    def test_vertices_stop_the_experiment(self, ellipse_file, caplog):
        with caplog.at_level(logging.ERROR):
            assert run(["experiment", ellipse_file, "--trials", "1"] + FAST) == EXIT_MATH_ERROR
        assert "VertexPresent" in caplog.text


class TestBoundAndConfig:
    def test_bound_json(self, spiral_file, capsys):
        assert run(["bound", spiral_file, "--delta", "1e-3"] + FAST) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["delta"] == 1e-3
        assert report["eps"] > 0

    def test_bound_delta_too_large(self, spiral_file, caplog):
        with caplog.at_level(logging.ERROR):
            assert run(["bound", spiral_file, "--delta", "0.5"] + FAST) == EXIT_MATH_ERROR
        assert "DeltaTooLarge" in caplog.text

    def test_invalid_config_file(self, tmp_path, spiral_file):
        path = tmp_path / "bad.yaml"
        path.write_text("integrator_steps: 2\n")

        assert run(["--config", str(path), "config", "validate"]) == EXIT_INPUT_ERROR
        assert run(["--config", str(path), "bound", spiral_file, "--delta", "1e-3"]) == EXIT_INPUT_ERROR

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args(["--version"])
        assert exc.value.code == 0
        assert capsys.readouterr().out.startswith("sigcurve")

    def test_no_command_prints_help(self, capsys):
        assert run([]) == EXIT_OK
        assert "usage" in capsys.readouterr().out
