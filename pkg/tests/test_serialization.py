import json

import numpy as np  # type: ignore
import pytest

from exceptions import MalformedInput
from families import FlattenKind
from hierarchy import flatten
from layer_state import LayerState, StreamReport
from manifolds import Circle, rectangle, sample
from monomials import make_basis
from point_cloud import PointCloud
from serialization import (
    flat_from_dict,
    flat_to_dict,
    parse_point,
    read_basis,
    read_cloud,
    read_dictionary,
    read_reports,
    read_signature,
    read_signatures,
    read_spec,
    signature_from_dict,
    signature_to_dict,
    signatures_equal,
    write_basis,
    write_cloud,
    write_dictionary,
    write_reports,
    write_signature,
    write_spec,
)
from stream_config import LayerConfig
from signature import FitConfig, fit, membership_score


@pytest.fixture
def circle_sig():
    return fit(sample(Circle(), 40, seed=0), FitConfig(degree=2))


class TestSignatureFiles:
    def test_file_round_trip(self, circle_sig, tmp_path):
        path = str(tmp_path / "circle.json")
        write_signature(circle_sig, path)
        loaded = read_signature(path)
        assert signatures_equal(loaded, circle_sig)
        assert loaded.moment is None
        assert membership_score(loaded, np.array([2.0, 0.0])) == pytest.approx(3.0, abs=1e-6)

    def test_projection_kept(self, tmp_path):
        cloud = PointCloud(np.random.default_rng(0).standard_normal((20, 6)))
        sig = fit(cloud, FitConfig(degree=1, projection_dim=3, seed=4))
        path = str(tmp_path / "projected.json")
        write_signature(sig, path)
        assert read_signature(path).projection == sig.projection

    def test_missing_eps_uses_t(self, circle_sig):
        data = signature_to_dict(circle_sig, include_eps=False)
        np.testing.assert_array_equal(signature_from_dict(data).eps_projector, circle_sig.null_projector)

    def test_missing_field(self, circle_sig):
        data = signature_to_dict(circle_sig)
        del data["T"]
        with pytest.raises(MalformedInput, match="'T'"):
            signature_from_dict(data, source="sig.json")

    def test_wrong_shape(self, circle_sig):
        data = signature_to_dict(circle_sig)
        data["T"] = [[1.0]]
        with pytest.raises(MalformedInput):
            signature_from_dict(data)

    def test_not_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{")
        with pytest.raises(MalformedInput):
            read_signature(str(path))

    def test_directory(self, circle_sig, tmp_path):
        for name in ("b.json", "a.json"):
            write_signature(circle_sig, str(tmp_path / name))
        (tmp_path / "notes.txt").write_text("skip me")
        sigs = read_signatures([str(tmp_path)])
        assert [sig.source.rsplit("/", 1)[-1] for sig in sigs] == ["a.json", "b.json"]

    def test_empty_directory(self, tmp_path):
        with pytest.raises(MalformedInput):
            read_signatures([str(tmp_path)])

    def test_sorted_keys(self, circle_sig, tmp_path):
        path = tmp_path / "circle.json"
        write_signature(circle_sig, str(path))
        keys = list(json.loads(path.read_text()))
        assert keys == sorted(keys)


class TestOtherFiles:
    def test_basis(self, tmp_path):
        basis = make_basis(3, 2, scaling="bombieri")
        write_basis(basis, str(tmp_path / "basis.json"))
        assert read_basis(str(tmp_path / "basis.json")) == basis

    def test_spec(self, tmp_path):
        spec = rectangle((0.0, 0.0), 1.0, 2.0, noise_sigma=0.01)
        write_spec(spec, str(tmp_path / "spec.json"))
        assert read_spec(str(tmp_path / "spec.json")) == spec

    def test_bad_spec_names_file(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text('{"kind": "torus"}')
        with pytest.raises(MalformedInput, match="spec.json"):
            read_spec(str(path))

    def test_cloud(self, tmp_path):
        cloud = sample(rectangle((0.0, 0.0), 1.0, 2.0), 12, seed=3)
        path = str(tmp_path / "cloud.csv")
        write_cloud(cloud, path)
        assert read_cloud(path) == cloud

    def test_cloud_columns_start_at_one(self, tmp_path):
        path = tmp_path / "cloud.csv"
        write_cloud(PointCloud(np.zeros((2, 3))), str(path))
        assert path.read_text().splitlines()[0] == "x1,x2,x3"

    def test_cloud_header(self, tmp_path):
        path = tmp_path / "cloud.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(MalformedInput):
            read_cloud(str(path))

    def test_cloud_not_numeric(self, tmp_path):
        path = tmp_path / "cloud.csv"
        path.write_text("x1,x2\n1,two\n")
        with pytest.raises(MalformedInput):
            read_cloud(str(path))

    def test_parse_point(self):
        np.testing.assert_array_equal(parse_point("0,1.5"), [0.0, 1.5])
        with pytest.raises(MalformedInput):
            parse_point("0;1")

    def test_flat(self, circle_sig):
        flat = flatten(circle_sig, FlattenKind.COMPLEMENT)
        again = flat_from_dict(json.loads(json.dumps(flat_to_dict(flat))))
        np.testing.assert_array_equal(again.vector, flat.vector)
        assert again.kind is FlattenKind.COMPLEMENT

    def test_reports(self, tmp_path):
        reports = [StreamReport(1, 0), StreamReport(1, 1, [0], [0.5], new_id=0, best_score=0.0, emitted=np.ones(3))]
        path = str(tmp_path / "reports.jsonl")
        write_reports(reports, path)
        rows = read_reports(path)
        assert [row["step"] for row in rows] == [0, 1]
        assert rows[1]["emitted_dim"] == 3
        assert rows[0]["emitted_dim"] is None

    def test_dictionary(self, tmp_path):
        layer = LayerState(2, LayerConfig())
        layer.admit(np.array([1.0, 2.0]), step=7)
        layer.admit(np.array([0.0, 1.0]), step=9)
        layer.dictionary[0].hits = 5
        write_dictionary(layer, str(tmp_path))
        entries = read_dictionary(str(tmp_path))
        assert [(e.id, e.hits, e.created_step) for e in entries] == [(0, 5, 7), (1, 1, 9)]
        np.testing.assert_array_equal(entries[0].vector, [1.0, 2.0])
        assert (tmp_path / "concept_0001.json").exists()
