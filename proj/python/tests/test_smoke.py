import json
import math
import os
import pathlib

import numpy as np
import pytest

import masa

CONFIG_DIR = pathlib.Path(os.environ.get("MASA_CONFIG_DIR", pathlib.Path(__file__).resolve().parents[2] / "configs"))


def quadratic(sigma=0.0):
    return masa.make_separable_quadratic(
        [2, 1], [np.array([1.0, -1.0]), np.array([2.0])], curvatures=[1.0, 0.5], noise_sigma=sigma
    )


def test_partition():
    p = masa.make_partition([2, 3])
    assert p.num_blocks == 2
    assert p.dim == 5
    assert p.indices(1) == [2, 3, 4]
    np.testing.assert_array_equal(p.subvector(np.arange(5.0), 1), [2.0, 3.0, 4.0])
    with pytest.raises(masa.PartitionError):
        masa.make_partition([2, 0])


def test_gain_schedules():
    assert masa.GainSchedule.constant(0.3).at(7) == 0.3
    g = masa.GainSchedule.polynomial_decay(2.0, 10.0, 1.0)
    assert g.at(0) == pytest.approx(2.0 / 11.0)
    assert g.at(9) == pytest.approx(2.0 / 20.0)


def test_quadratic_oracles():
    q = quadratic()
    theta = np.zeros(3)
    assert q.loss(theta) == pytest.approx(1.0 + 1.0 + 0.5 * 4.0)
    np.testing.assert_allclose(q.gradient(theta), [-2.0, 2.0, -2.0])
    np.testing.assert_allclose(q.block_gradient(1, theta), [0.0, 0.0, -2.0])
    np.testing.assert_array_equal(q.true_optimum, [1.0, -1.0, 2.0])


def test_metropolis_weights_are_doubly_stochastic():
    w = masa.metropolis_weights(4, [(0, 1), (1, 2), (2, 3)])
    np.testing.assert_allclose(w.sum(axis=0), 1.0)
    np.testing.assert_allclose(w.sum(axis=1), 1.0)
    assert w[0, 1] == pytest.approx(1.0 / 3.0)
    ring = masa.ring_graph(5)
    assert ring.neighbors(0) == [0, 1, 4]
    np.testing.assert_allclose(ring.weights(), masa.metropolis_weights(5, ring.edges()))


@pytest.mark.parametrize("algorithm", ["gcsa", "dsa", "dsa_s", "cisa"])
def test_noiseless_algorithms_converge(algorithm):
    q = quadratic()
    graph = masa.ring_graph(2) if algorithm in ("dsa", "dsa_s") else None
    trace = masa.run(
        algorithm,
        q.benchmark(),
        masa.GainSchedule.constant(0.2),
        [np.zeros(3)],
        graph=graph,
        max_iterations=400,
    )
    assert trace["k"][0] == 0
    assert trace["k"][-1] == 400
    assert trace["error"][-1] < 1e-3
    assert trace["error"][-1] < trace["error"][0]


def test_estimators_and_counts():
    q = quadratic(sigma=0.05)
    for est, loss_per_block in [(masa.BlockEstimator.fdsa, None), (masa.BlockEstimator.spsa, 2)]:
        trace = masa.run(
            "gcsa",
            q.benchmark(),
            masa.GainSchedule.polynomial_decay(0.5, 5.0, 1.0),
            [np.zeros(3)],
            estimator=est(masa.PerturbSchedule.constant(0.1)),
            max_iterations=10,
            seed=3,
        )
        assert trace["grad_evals"][-1] == 0
        if loss_per_block is not None:
            assert trace["loss_evals"][-1] == 10 * 2 * loss_per_block


def test_run_is_deterministic():
    q = quadratic(sigma=0.2)
    args = ("gcsa", q.benchmark(), masa.GainSchedule.constant(0.1), [np.ones(3)])
    a = masa.run(*args, max_iterations=50, seed=9)
    b = masa.run(*args, max_iterations=50, seed=9)
    np.testing.assert_array_equal(a["error"], b["error"])
    np.testing.assert_array_equal(a["final_theta"], b["final_theta"])


def test_regression_cisa():
    angles = np.linspace(0.0, 2.0 * math.pi, 5, endpoint=False)
    locations = [np.array([2.0 * math.cos(t), 2.0 * math.sin(t)]) for t in angles]
    field = masa.make_regression_field(
        locations, np.array([1.0, -2.0, 0.5]), samples_per_agent=[20], noise_sigma=0.1, seed=4
    )
    assert field.num_agents == 5
    assert not field.rank_deficient
    trace = masa.run(
        "cisa",
        field.benchmark(),
        masa.GainSchedule.polynomial_decay(0.5, 50.0, 1.0),
        [np.zeros(3)],
        max_iterations=2000,
        seed=1,
    )
    assert trace["error"][-1] < 0.2 * trace["error"][0]
    assert np.isnan(trace["loss"]).all() or np.isfinite(trace["loss"]).all()


def test_framework_mismatch_raises():
    angles = np.linspace(0.0, 2.0 * math.pi, 3, endpoint=False)
    field = masa.make_regression_field(
        [np.array([math.cos(t), math.sin(t)]) for t in angles], np.array([1.0, 0.0, 0.0]), seed=1
    )
    with pytest.raises(masa.ConfigError):
        masa.run("gcsa", field.benchmark(), masa.GainSchedule.constant(0.1), [np.zeros(3)], max_iterations=5)
    with pytest.raises(masa.Error):
        masa.run("nope", field.benchmark(), masa.GainSchedule.constant(0.1), [np.zeros(3)])


def test_surveillance_beats_frozen_headings():
    out = masa.track_surveillance(steps=200, seed=2)
    assert len(out["k"]) == 201
    assert out["mean_loss"] < out["frozen_mean_loss"]


def test_config_roundtrip(tmp_path):
    path = CONFIG_DIR / "quadratic_gcsa.yaml"
    masa.validate_config(path)
    summary = json.loads(masa.run_config(path, out_dir=tmp_path))
    assert summary["runs"]
    assert all(row["status"] == "ok" for row in summary["runs"])
    traces = sorted(tmp_path.glob("*.csv"))
    assert traces
    trace = masa.read_trace(traces[0])
    assert trace["k"][0] == 0
    with pytest.raises(masa.ConfigError):
        masa.validate_config(CONFIG_DIR / "invalid_framework.yaml")
    with pytest.raises(masa.IoError):
        masa.validate_config(tmp_path / "missing.yaml")
