"""Analytic curves and the file formats."""

import json

import numpy as np
import pytest

from src import shapes
from src.curve_core import euclidean_curvature, resample_by_arclength
from src.formats import (
    EXPERIMENT_HEADER,
    read_curvature,
    read_curve,
    read_signature,
    write_curve,
    write_experiment,
    write_signature,
)
from src.robustness import ExperimentRow, ExperimentTable
from src.signature import PhasePortrait
from src.utils import CurveFormatError, SignatureKind


class TestShapes:
    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="Unknown curve kind"):
            shapes.curve_from_spec({"kind": "hypocycloid"})

    def test_bad_parameters(self):
        with pytest.raises(ValueError, match="Bad parameters"):
            shapes.curve_from_spec({"kind": "circle", "params": {"diameter": 2}})

    def test_sample_count_override(self):
        curve = shapes.curve_from_spec({"kind": "ellipse", "params": {"a": 3, "b": 1}, "n": 300})
        assert curve.sample_count == 300
        assert curve.analytic_tag["kind"] == "ellipse"

    def test_clothoid_curvature_grows_linearly(self, config):
        arc = resample_by_arclength(shapes.clothoid(length=2.0, n=1024), 1024, config)
        profile = euclidean_curvature(arc, 0, config)
        interior = slice(16, -16)
        np.testing.assert_allclose(profile.kappa[interior], profile.s[interior], atol=1e-4)

    def test_custom_curvature_is_a_circle(self):
        curve = shapes.custom_curvature([2.0], length=np.pi / 2)
        # half a circle of radius 1/2 from the origin heading along +x
        np.testing.assert_allclose(curve.samples[-1], [0.0, 1.0], atol=1e-9)


class TestCurveFiles:
    def test_samples_form(self, write_json):
        path = write_json("square.json", {
            "closed": True,
            "samples": [[0, 0], [1, 0], [1, 1], [0, 1]],
        })
        curve = read_curve(path)

        assert curve.closed
        assert curve.sample_count == 4

    def test_analytic_form(self, write_json):
        curve = read_curve(write_json("circle.json", {"kind": "circle", "params": {"radius": 2.0}, "n": 128}))
        assert curve.closed
        np.testing.assert_allclose(np.linalg.norm(curve.samples, axis=1), 2.0)

    def test_round_trip(self, tmp_path, ellipse):
        path = tmp_path / "out.json"
        write_curve(ellipse, path, metadata={"source": "ellipse"})

        data = json.loads(path.read_text())
        assert data["metadata"] == {"source": "ellipse"}
        np.testing.assert_array_equal(read_curve(path).samples, ellipse.samples)

    @pytest.mark.parametrize("content", [
        "{not json",
        "[1, 2, 3]",
        '{"closed": false}',
        '{"samples": [[0, 0], [1, 1]]}',
        '{"samples": [[0, 0], [1, 1], [1, 1], [2, 0]]}',
        '{"kind": "spirograph"}',
    ])
    def test_malformed(self, tmp_path, content):
        path = tmp_path / "bad.json"
        path.write_text(content)
        with pytest.raises(CurveFormatError):
            read_curve(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            read_curve(tmp_path / "absent.json")


class TestSignatureFiles:
    def test_sidecar_keeps_metadata(self, tmp_path):
        s = np.linspace(0.0, 1.0, 5, endpoint=False)
        sig = PhasePortrait(s, np.column_stack([np.ones(5), np.zeros(5)]), SignatureKind.AFFINE,
                            closed=True, length=1.0, periods=3)
        path = tmp_path / "sig.csv"
        text = write_signature(sig, path)

        assert text.splitlines()[0] == "s,k0,k1"
        meta = json.loads((tmp_path / "sig.json").read_text())
        assert meta == {"kind": "affine", "order": 1, "closed": True, "L": 1.0, "periods": 3}

        back = read_signature(path)
        assert back.kind is SignatureKind.AFFINE
        assert back.closed and back.periods == 3
        np.testing.assert_array_equal(back.samples, sig.samples)

    def test_without_sidecar(self, tmp_path):
        path = tmp_path / "plain.csv"
        path.write_text("s,k0,k1\n0,1,2\n0.5,1.5,2\n1,2,2\n")

        sig = read_signature(path)
        assert sig.kind is SignatureKind.EUCLIDEAN
        assert not sig.closed
        assert sig.length == 1.0

    def test_curvature_needs_only_kappa(self, tmp_path):
        path = tmp_path / "kappa.csv"
        path.write_text("s,k0\n1.0,1\n2.0,1\n3.0,1\n")

        profile = read_curvature(path)
        np.testing.assert_array_equal(profile.s, [0.0, 1.0, 2.0])
        assert profile.length == 2.0

    @pytest.mark.parametrize("content", [
        "",
        "t,k0,k1\n0,1,2\n1,1,2\n",
        "s,k1,k0\n0,1,2\n1,1,2\n",
        "s,k0,k1\n0,1,2\n",
        "s,k0,k1\n0,1,x\n1,1,2\n",
        "s,k0\n0,1\n1,1\n",
    ])
    def test_bad_signature_csv(self, tmp_path, content):
        path = tmp_path / "bad.csv"
        path.write_text(content)
        with pytest.raises(CurveFormatError):
            read_signature(path)


class TestExperimentFiles:
    def test_header_only(self):
        assert write_experiment(ExperimentTable()) == ",".join(EXPERIMENT_HEADER) + "\n"

    def test_rows(self, tmp_path):
        table = ExperimentTable([
            ExperimentRow(0, 1e-3, 1e-3, 2e-4, 6e-3, True, True),
            ExperimentRow(1, 1e-3, 5e-4, float("nan"), float("nan"), False, False),
        ])
        lines = write_experiment(table, tmp_path / "rows.csv").splitlines()

        assert lines[1] == "0,0.001,0.0002,0.006,true,true"
        assert lines[2].endswith(",nan,false,false")
        assert (tmp_path / "rows.csv").read_text().splitlines() == lines

    def test_json(self):
        table = ExperimentTable([ExperimentRow(4, 1e-4, 2e-4, 1e-5, 6e-4, True, True)])
        records = json.loads(write_experiment(table, output_format="json"))
        assert records == [{"trial": 4, "delta_measured": 2e-4, "d_curves": 1e-5,
                            "eps_bound": 6e-4, "in_hypothesis": True, "pass": True}]
