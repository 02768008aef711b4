import json

import numpy as np
import pytest

import exposome


def test_ols_recovers_plane():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(60, 2))
    y = 1.5 + 2.0 * x[:, 0] - 0.5 * x[:, 1] + rng.normal(scale=0.01, size=60)
    r = exposome.ols(x, y)
    want, *_ = np.linalg.lstsq(np.column_stack([np.ones(60), x]), y, rcond=None)
    np.testing.assert_allclose(r["coefficients"], want, atol=1e-10)
    assert r["degrees_of_freedom"] == 57
    assert len(r["residuals"]) == 60


def test_rank_deficient_raises_with_kind():
    x = np.ones((10, 2))
    with pytest.raises(exposome.ExposomeError) as info:
        exposome.ols(x, np.arange(10.0))
    assert info.value.kind == "RankDeficient"


def test_pca_line():
    t = np.linspace(0, 1, 30)
    p = exposome.pca(np.column_stack([t, 2 - 3 * t]), ["a", "b"])
    np.testing.assert_allclose(p["explained_ratio"], [1.0, 0.0], atol=1e-12)
    assert p["channels"] == ["a", "b"]


def test_interpolation_and_pearson():
    assert exposome.interpolate_linear(0.0, 1.0, 2.0, 5.0, 1.0) == pytest.approx(3.0)
    x = np.arange(20.0)
    assert exposome.pearson(x, 3 * x + 1) == pytest.approx(1.0)


def test_voronoi_areas_cover_box():
    rng = np.random.default_rng(3)
    pts = rng.uniform(0, 100, size=(25, 2))
    cells = exposome.voronoi(pts, np.arange(25.0), (0, 0, 100, 100))
    assert len(cells) == 25
    assert sum(c["area"] for c in cells) == pytest.approx(10000.0, rel=1e-9)
    assert cells[0]["polygon"].shape[1] == 2


def test_dbn_and_classifier():
    rng = np.random.default_rng(5)
    y = np.repeat([1, 5], 60)
    x = np.where(y[:, None] == 1, 0.2, 0.8) + rng.normal(scale=0.05, size=(120, 4))
    model = exposome.train_dbn(x, hidden=[3, 2], learning_rate=0.5, epochs=30, batch_size=20, seed=2)
    assert model.layer_sizes == [4, 3, 2]
    f = model.features(x)
    assert f.shape == (120, 2)
    back = exposome.DbnModel.from_json(model.to_json())
    np.testing.assert_array_equal(back.features(x), f)
    r = exposome.kfold_cv(x, y.tolist(), model="gaussian_nb", folds=5, seed=1)
    assert r["mean_accuracy"] > 0.95
    assert len(r["fold_accuracies"]) == 5


def test_session_roundtrip(tmp_path):
    manifest = exposome.synthesize_session(tmp_path / "s", seed=3, duration_s=300)
    v = exposome.validate_session(manifest)
    assert v["overlap_ms"] is not None
    t = exposome.fuse_session(manifest)
    assert t["values"].shape == (len(t["times_s"]), len(t["channels"]))
    assert "PM2.5" in t["channels"]


def test_run_pipeline(tmp_path):
    cfg = exposome.default_config()
    assert cfg["seed"] == 7
    report = exposome.run_pipeline(cfg, out_dir=tmp_path, classifiers=["gaussian_nb"], ablation=False)
    assert report["success"]
    assert [s["name"] for s in report["stages"]] == exposome.pipeline_stages()
    written = {o["path"] for o in report["outputs"]}
    assert "voronoi.geojson" in written
    assert json.loads((tmp_path / "run_report.json").read_text())["success"]
