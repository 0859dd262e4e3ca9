import numpy as np
import pytest

import _fmcsc as fmcsc

SMALL_CONFIG = """
synthetic.samples = 240
synthetic.classes = 3
synthetic.views = 2
synthetic.view_dims = 8,6
synthetic.separation = 6
synthetic.noise_sigma = 0.3
partition.multi_clients = 2
partition.single_clients = 2
rounds = 2
local_epochs = 2
pretrain_epochs = 3
batch_size = 64
model.encoder_hidden = 16,8
model.latent_dim = 4
model.common_dim = 4
model.head_hidden = 8
seed = 13
"""


def test_generate_synthetic_shapes_and_determinism():
    a = fmcsc.generate_synthetic(120, 3, [7, 5], seed=99)
    b = fmcsc.generate_synthetic(120, 3, [7, 5], seed=99)
    assert len(a["views"]) == 2
    assert a["views"][0].shape == (120, 7)
    assert a["views"][1].shape == (120, 5)
    assert a["labels"].shape == (120,)
    assert set(np.unique(a["labels"])) <= {0, 1, 2}
    np.testing.assert_array_equal(a["views"][0], b["views"][0])
    np.testing.assert_array_equal(a["labels"], b["labels"])


def test_kmeans_recovers_separated_clusters():
    ds = fmcsc.generate_synthetic(150, 3, [6], separation=50.0, noise_sigma=0.0, seed=1)
    result = fmcsc.kmeans(ds["views"][0], 3, seed=1)
    assert result["labels"].shape == (150,)
    assert result["centers"].shape == (3, 6)
    assert fmcsc.accuracy(result["labels"], ds["labels"]) == pytest.approx(1.0)
    assert fmcsc.nmi(result["labels"], ds["labels"]) == pytest.approx(1.0)
    assert fmcsc.ari(result["labels"], ds["labels"]) == pytest.approx(1.0)


def test_metrics_match_known_values():
    truth = np.array([1, 1, 0, 2, 2], dtype=np.uint32)
    pred = np.array([0, 0, 1, 1, 2], dtype=np.uint32)
    assert fmcsc.accuracy(pred, truth) == pytest.approx(0.8)
    assert fmcsc.ari(np.array([0, 0, 1, 1], dtype=np.uint32),
                     np.array([0, 0, 0, 1], dtype=np.uint32)) == pytest.approx(0.0)


def test_run_experiment_report_structure():
    report = fmcsc.run_experiment(SMALL_CONFIG)
    assert len(report["rows"]) == 3  # pre-training row + 2 rounds
    for row in report["rows"]:
        assert 0.0 <= row["acc"] <= 1.0
        assert np.isfinite(row["mean_recon_loss_mv"])
    assert report["metrics_csv"].splitlines()[0].startswith("round,acc,nmi,ari")
    assert report["embedding"].shape == (240, 2)
    assert report["pred_labels"].shape == (240,)
    assert report["true_labels"].shape == (240,)


def test_run_experiment_is_deterministic_and_seed_sensitive():
    a = fmcsc.run_experiment(SMALL_CONFIG)
    b = fmcsc.run_experiment(SMALL_CONFIG)
    assert a["metrics_csv"] == b["metrics_csv"]
    np.testing.assert_array_equal(a["embedding"], b["embedding"])
    c = fmcsc.run_experiment(SMALL_CONFIG, seed=14)
    assert c["metrics_csv"] != a["metrics_csv"]
    d = fmcsc.run_experiment(SMALL_CONFIG, workers=4)
    assert d["metrics_csv"] == a["metrics_csv"]


def test_config_errors_surface_as_python_exceptions():
    with pytest.raises(ValueError):
        fmcsc.run_experiment("no_such_key = 1\n")
    with pytest.raises(ValueError):
        fmcsc.run_experiment(SMALL_CONFIG + "learning_rate = 0\n")
    with pytest.raises(ValueError):
        fmcsc.kmeans(np.zeros((2, 2), dtype=np.float32), 5)
