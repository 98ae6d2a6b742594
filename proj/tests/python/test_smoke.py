import numpy as np
import pytest

import occkit


def small_config(n_major=40, n_train=30, n_minor=10):
    cfg = occkit.SyntheticConfig()
    cfg.n_majority = n_major
    cfg.n_train = n_train
    cfg.n_minority = n_minor
    cfg.dims = (8, 8, 1)
    return cfg


def test_linear_magnification():
    img = np.full((2, 2), 0.3)
    out = occkit.apply_linear(img, 0.8, -0.2)
    assert out.shape == (2, 2, 1)
    assert np.allclose(out, 0.04)
    assert np.allclose(occkit.apply_linear(np.full((1, 1), 0.9), 1.4), 1.0)


def test_geometric():
    img = np.array([[0.1, 0.2], [0.3, 0.4]])
    assert np.allclose(occkit.apply_rotation(img, 180)[..., 0], [[0.4, 0.3], [0.2, 0.1]])
    shifted = occkit.apply_shift(np.arange(9.0).reshape(3, 3) / 10, 1, 0)[..., 0]
    assert np.allclose(shifted[:, 0], 0.0)
    assert np.allclose(shifted[:, 1:], np.arange(9.0).reshape(3, 3)[:, :2] / 10)


def test_presets_and_errors():
    assert "LM(5,2)" in occkit.preset_names()
    s = occkit.preset("LM(5,0)")
    assert len(s) == 5 and s.identity_index == 2
    with pytest.raises(occkit.InvalidArgument, match="LM\\(5,0\\)"):
        occkit.preset("nope")
    with pytest.raises(occkit.InvalidArgument):
        occkit.parse_transform_set(
            '{"name":"x","transforms":[{"kind":"linear","c":1,"b":0},{"kind":"linear","c":1,"b":0}]}')
    pairs = occkit.expand(np.full((3, 3), 0.5), occkit.preset("LM(3,0)"))
    assert [label for _, label in pairs] == [0, 1, 2]
    assert np.allclose([p.mean() for p, _ in pairs], [0.2, 0.5, 0.8])


def test_score_and_metrics():
    assert occkit.score(np.array([[0.7, 0.3], [0.4, 0.6]])) == pytest.approx(1.3)
    assert occkit.auc([0.8, 0.4, 0.6, 0.2], [True, True, False, False]) == 0.75
    assert occkit.aupr([0.9, 0.8, 0.7], [True, False, True]) == pytest.approx(5 / 6)
    mean, std = occkit.aggregate([70, 74, 78])
    assert mean == pytest.approx(74.0)
    assert std == pytest.approx(3.266, abs=1e-3)


def test_train_score_roundtrip(tmp_path):
    data = occkit.generate_synthetic(small_config())
    train = [im for im, sp in zip(data["images"], data["splits"]) if sp == "train"]
    assert len(train) == 30
    s = occkit.preset("LM(5,2)")
    model = occkit.train(np.stack(train), s, architecture="small_conv(1)", learning_rate=0.005,
                         batch_size=32, epochs=2, seed=3)
    assert model.n_classes == 5
    assert model.input_dims == (8, 8, 1)
    assert len(model.loss_curve) == 2

    p = occkit.probability_matrix(model, train[0], s)
    assert p.shape == (5, 5)
    assert np.allclose(p.sum(axis=1), 1.0)
    scores = occkit.score_images(model, train[:4], s)
    assert all(0.0 <= x <= 5.0 for x in scores)
    assert scores[0] == pytest.approx(np.trace(p))

    path = tmp_path / "model.bin"
    occkit.save_model(model, path)
    loaded = occkit.load_model(path)
    assert loaded.model_id() == model.model_id()
    assert np.allclose(loaded.predict_proba(train[:3]), model.predict_proba(train[:3]), atol=1e-9)
    with pytest.raises(occkit.DimensionError):
        occkit.probability_matrix(loaded, train[0], occkit.preset("R(4,0)"))

    path.write_bytes(path.read_bytes()[:40])
    with pytest.raises(occkit.CorruptFile):
        occkit.load_model(path)


def test_run_experiment(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text("""{
      "dataset": {"synthetic": {"n_majority": 30, "n_minority": 10, "n_train": 20, "dims": "8x8x1"}},
      "transform_set": "LM(5,2)",
      "classifier": {"architecture": "small_conv(1)"},
      "train": {"epochs": 1, "learning_rate": 0.005},
      "runs": 2,
      "output_dir": "%s"
    }""" % (tmp_path / "out"))
    result = occkit.run_experiment(cfg)
    assert result["runs"] == 2
    assert 0.0 <= result["auc"][0] <= 1.0
    assert (tmp_path / "out" / "metrics.txt").exists()
