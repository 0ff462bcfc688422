import json

import numpy as np  # type: ignore
import pytest

from experiments import subspace_stream
from main import build_parser, main
from manifolds import Circle
from point_cloud import PointCloud
from serialization import read_cloud, read_reports, read_signature, write_cloud, write_spec


@pytest.fixture
def circle_files(tmp_path):
    cloud = str(tmp_path / "circle.csv")
    sig = str(tmp_path / "circle.json")
    assert main(["gen", "--preset", "unit_circle", "--n", "50", "-o", cloud]) == 0
    assert main(["fit", "--input", cloud, "--degree", "2", "-o", sig]) == 0
    return cloud, sig


def fit_circle(tmp_path, radius, seed):
    spec = str(tmp_path / f"spec_{seed}.json")
    cloud = str(tmp_path / f"cloud_{seed}.csv")
    (tmp_path / "sigs").mkdir(exist_ok=True)
    sig = str(tmp_path / "sigs" / f"sig_{seed}.json")
    write_spec(Circle(radius=radius), spec)
    assert main(["--seed", str(seed), "gen", "--spec", spec, "--n", "30", "-o", cloud]) == 0
    assert main(["fit", "--input", cloud, "--degree", "2", "-o", sig]) == 0
    return sig


class TestParser:
    def test_every_command(self):
        parser = build_parser()
        args = parser.parse_args(["--seed", "4", "score", "sig.json", "--point", "0,1"])
        assert args.seed == 4
        assert args.point == ["0,1"]

    def test_requires_command(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])


class TestSignatureCommands:
    def test_gen(self, circle_files):
        cloud = read_cloud(circle_files[0])
        assert cloud.size == 50
        np.testing.assert_allclose(np.linalg.norm(cloud.points, axis=1), 1.0)

    def test_fit_and_score(self, circle_files, capsys):
        _, sig = circle_files
        assert read_signature(sig).null_rank == 1
        capsys.readouterr()
        assert main(["score", sig, "--point", "2,0", "--point", "0,1"]) == 0
        far, near = capsys.readouterr().out.split()
        assert far == "3"
        assert float(near) <= 1e-10

    def test_score_cloud(self, circle_files, capsys):
        cloud, sig = circle_files
        capsys.readouterr()
        assert main(["score", sig, "--input", cloud]) == 0
        scores = [float(line) for line in capsys.readouterr().out.split()]
        assert len(scores) == 50
        assert max(scores) <= 1e-10

    def test_sim_with_itself(self, circle_files, capsys):
        _, sig = circle_files
        capsys.readouterr()
        assert main(["sim", sig, sig]) == 0
        overlap = json.loads(capsys.readouterr().out)
        assert overlap["t_overlap"] == pytest.approx(1.0)
        assert overlap["f_overlap"] == pytest.approx(5.0)
        assert overlap["t_overlap_from_f"] == pytest.approx(1.0)

    def test_intersect(self, circle_files, tmp_path):
        _, sig = circle_files
        meet = str(tmp_path / "meet.json")
        assert main(["intersect", sig, sig, "-o", meet]) == 0
        np.testing.assert_allclose(read_signature(meet).null_projector, read_signature(sig).null_projector, atol=1e-8)

    def test_dict(self, circle_files, tmp_path, capsys):
        _, sig = circle_files
        capsys.readouterr()
        assert main(["dict", sig, sig, "-o", str(tmp_path / "atoms")]) == 0
        assert capsys.readouterr().out.strip() == "1 atoms"
        assert (tmp_path / "atoms" / "atom_000.json").exists()

    def test_hier(self, tmp_path, capsys):
        candidate = fit_circle(tmp_path, 1.37, 100)
        concept = str(tmp_path / "concept.json")
        members = [fit_circle(tmp_path, radius, seed) for seed, radius in enumerate(np.linspace(0.5, 2.0, 8))]
        assert main(["hier", "--sigs", *members, "-o", concept]) == 0
        capsys.readouterr()
        assert main(["hier-score", "--exact", concept, candidate]) == 0
        exact = float(capsys.readouterr().out)
        assert exact <= 1e-6
        assert main(["hier-score", concept, candidate]) == 0
        assert float(capsys.readouterr().out) >= exact - 1e-12


class TestOtherCommands:
    def test_project(self, tmp_path, capsys):
        source = str(tmp_path / "points.csv")
        target = str(tmp_path / "projected.csv")
        write_cloud(PointCloud(np.random.default_rng(0).standard_normal((10, 200))), source)
        capsys.readouterr()
        assert main(["project", "--input", source, "--k", "1", "-o", target]) == 0
        assert capsys.readouterr().out.strip() == "128"
        assert read_cloud(target).dim == 128

    def test_project_needs_dimension(self, tmp_path):
        source = str(tmp_path / "points.csv")
        write_cloud(PointCloud(np.ones((2, 3))), source)
        assert main(["project", "--input", source, "-o", str(tmp_path / "out.csv")]) == 2

    def test_stream(self, tmp_path, capsys):
        points, _, _ = subspace_stream(seed=0, per_subspace=30)
        source = str(tmp_path / "stream.csv")
        report = str(tmp_path / "reports.jsonl")
        checkpoint = str(tmp_path / "engine.xz")
        write_cloud(PointCloud(points), source)
        capsys.readouterr()
        assert main([
            "stream", "--input", source, "--report", report,
            "--dictionary", str(tmp_path / "dictionary"), "--checkpoint", checkpoint,
        ]) == 0
        assert capsys.readouterr().out.startswith("layer1=3 ")
        assert (tmp_path / "dictionary" / "layer_1" / "index.json").exists()
        rows = read_reports(report)
        assert rows[0] == {
            "layer": 1, "step": 0, "chosen_steps": [], "scores": [], "match_id": None,
            "new_id": None, "best_score": None, "emitted_dim": None, "error": "",
        }
        assert main(["stream", "--input", source, "--report", report, "--resume", checkpoint]) == 0
        assert capsys.readouterr().out.startswith("layer1=3 ")
        assert read_reports(report)[0]["step"] == 90

    def test_mlp_check(self, capsys):
        assert main(["mlp-check", "--d", "2", "--units", "2000", "--n", "100"]) == 0
        result = json.loads(capsys.readouterr().out)
        assert result["d"] == 2
        assert max(result["calibration"]["residuals"]) <= 1e-6
        assert result["moment_error"] < 1.0

    def test_repro_list(self, capsys):
        assert main(["repro", "list"]) == 0
        names = [line.split()[0] for line in capsys.readouterr().out.splitlines()]
        assert "circle-signature" in names
        assert "stream" in names

    def test_repro(self, tmp_path, capsys):
        output = str(tmp_path / "outcome.json")
        assert main(["repro", "memorization", "-o", output]) == 0
        assert "[PASS] memorization" in capsys.readouterr().out
        with open(output) as f:
            assert json.load(f)[0]["passed"] is True

    def test_unknown_experiment(self):
        assert main(["repro", "nonsense"]) == 2

    def test_missing_input(self, tmp_path):
        assert main(["fit", "--input", str(tmp_path / "missing.csv"), "--degree", "2", "-o", "x.json"]) == 2
