import math

import numpy as np
import pytest

import daadb

QUICK = {
    "known_ratio": 1.0,
    "seeds": [0, 1],
    "feature_dim": 16,
    "max_epochs": 8,
    "synthetic": {
        "num_classes": 3,
        "dim": 3,
        "train_per_class": 60,
        "valid_per_class": 20,
        "test_per_class": 30,
        "open_test": 60,
    },
}


def test_scalar_helpers():
    assert daadb.softplus(0.0) == pytest.approx(math.log(2.0), abs=1e-12)
    assert daadb.distance_coefficient(1.5, 1.5) == 1.0
    assert np.linalg.norm(daadb.squash(np.array([3.0, 4.0]))) == pytest.approx(25 / 26)


def test_featurize_shapes_and_norms():
    x = daadb.featurize(["book a flight", "play jazz music", ""], hash_dim=64)
    assert x.shape == (3, 64)
    assert np.linalg.norm(x[0]) == pytest.approx(1.0)
    assert not x[2].any()
    with pytest.raises(ValueError):
        daadb.featurize(["x"], hash_dim=4)


def test_embeddings_round_trip(tmp_path):
    m = np.arange(12, dtype=np.float64).reshape(4, 3) / 8
    daadb.save_embeddings(tmp_path / "m.emb", m)
    np.testing.assert_array_equal(daadb.load_embeddings(tmp_path / "m.emb"), m)
    (tmp_path / "bad.emb").write_bytes(b"EMB2")
    with pytest.raises(daadb.FormatError):
        daadb.load_embeddings(tmp_path / "bad.emb")


def test_evaluate_hand_case():
    r = daadb.evaluate(np.array([0, 0, 1, 1, 2, 2]), np.array([0, 1, 1, 1, 2, 0]), 2)
    assert r["acc"] == pytest.approx(4 / 6)
    assert r["f1"] == pytest.approx(52 / 75, abs=1e-12)
    assert r["f1_known"] == pytest.approx(21 / 32, abs=1e-12)
    assert r["f1_open"] == pytest.approx(2 / 3, abs=1e-12)


def test_boundaries_and_classify():
    rng = np.random.default_rng(0)
    z = rng.normal(size=(2000, 2))
    labels = np.arange(2000) % 2
    z[labels == 1] += 6.0
    fit = daadb.fit_boundaries(z, labels, 2, seed=1)
    assert fit["epochs"] <= 200
    pred = daadb.classify(z, fit["centroids"], np.array(fit["radius"]))
    inside = (pred == labels).mean()
    assert 0.4 <= inside <= 0.6
    assert daadb.boundary_gradient(np.array([2.0, 3.0, 5.0, 0.1]), np.zeros(4, dtype=int), np.array([0.0]), 0) == pytest.approx(-0.25)


def test_run_experiment_and_model(tmp_path):
    cfg = dict(QUICK, output_dir=str(tmp_path / "out"))
    res = daadb.run_experiment(cfg)
    assert res["aggregate"]["runs"] == 2
    assert res["config_hash"] == daadb.config_hash(QUICK)
    again = daadb.run_experiment(QUICK)
    assert again["runs"] == res["runs"]

    model = daadb.Model.load(tmp_path / "out" / "seed_0" / "model.daadb")
    assert model.method == "da_adb"
    assert model.num_known == 3
    assert len(model.radius) == 3
    x = np.zeros((5, model.input_dim))
    pred = model.predict(x)
    assert pred.shape == (5,)
    assert set(pred) <= set(range(4))
    assert (model.predict_scaled(x, 1e-9) == 3).all()

    table = daadb.format_results_table([res])
    assert "da_adb" in table.splitlines()[1]


def test_ablation_and_study():
    rows = daadb.run_radius_ablation(QUICK, [0.5, 1.0])
    assert [f for f, _ in rows] == [0.5, 1.0]
    study = daadb.run_labeled_ratio_study(dict(QUICK, seeds=[0]), [1.0], ["da_adb", "msp"])
    assert [m for _, m, _ in study] == ["da_adb", "msp"]


def test_bad_config_is_reported():
    with pytest.raises(ValueError):
        daadb.run_experiment({"method": "svm"})
    with pytest.raises(RuntimeError):
        daadb.run_experiment(dict(QUICK, known_ratio=0.25))
