import io

import numpy as np  # type: ignore
import pytest

import experiments
from report_log import ReportLog


class TestRegistry:
    def test_names(self):
        assert {
            "circle-signature", "subspace-overlap", "similarity-corollaries", "intersection", "dictionary",
            "circle-concept", "rotation-family", "motion-concept", "monotonicity", "random-projection",
            "residual-decay", "stream", "random-mlp", "memorization", "random-spheres",
        } <= set(experiments.experiments)

    def test_every_experiment_has_a_summary(self):
        assert all(cls.summary for cls in experiments.experiments.values())

    def test_base_measure_not_implemented(self):
        with pytest.raises(NotImplementedError):
            experiments.Experiment().run()


# Two random spheres come out near 1/3 in the raw basis and near 0.85 after
# sphere normalization; neither convention reaches 1/5.
KNOWN_FAILURES = {"random-spheres": "measured mean is about 0.33, not 1/5"}


def _cases():
    for name in sorted(experiments.experiments):
        if name in KNOWN_FAILURES:
            yield pytest.param(name, marks=pytest.mark.xfail(reason=KNOWN_FAILURES[name], strict=True))
        else:
            yield name


@pytest.mark.parametrize("name", list(_cases()))
def test_experiment_passes(name):
    outcome = experiments.run(name, seed=0)
    assert outcome.passed, outcome.checks


def test_same_seed_same_values():
    first = experiments.run("circle-signature", seed=3)
    second = experiments.run("circle-signature", seed=3)
    assert first.values == second.values


def test_run_logs_verdicts():
    log = ReportLog()
    experiments.run("memorization", seed=0, log=log)
    stream = io.StringIO()
    log.render(stream)
    lines = stream.getvalue().splitlines()
    assert lines[-1] == "[PASS] memorization"
    assert any(line.startswith("memorization: worst_at_points = ") for line in lines)


def test_subspace_stream_bases():
    points, labels, bases = experiments.subspace_stream(seed=0, per_subspace=5)
    assert points.shape == (15, 20)
    assert labels.tolist()[:4] == [0, 1, 2, 0]
    for rows in bases:
        np.testing.assert_allclose(rows @ rows.T, np.eye(2), atol=1e-12)
    assert np.abs(bases[0] @ bases[1].T).max() > 1e-3
    for point, label in zip(points, labels):
        np.testing.assert_allclose(point @ bases[label].T @ bases[label], point, atol=1e-12)


def test_outcome_dict():
    outcome = experiments.Outcome("x", 1, {"a": 2}, {"ok": True, "bad": False})
    assert outcome.to_dict() == {
        "name": "x", "seed": 1, "passed": False, "values": {"a": 2.0}, "checks": {"ok": True, "bad": False},
    }
