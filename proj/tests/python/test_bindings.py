import itertools
import math

import numpy as np
import pytest

import bevlab


def supcon_reference(z, labels, tau):
    z = z / np.linalg.norm(z, axis=1, keepdims=True)
    sim = z @ z.T / tau
    total, anchors = 0.0, 0
    for i in range(len(z)):
        positives = [p for p in range(len(z)) if p != i and labels[p] == labels[i]]
        if not positives:
            continue
        others = [a for a in range(len(z)) if a != i]
        log_denom = np.log(np.sum(np.exp(sim[i, others])))
        total += -np.mean([sim[i, p] - log_denom for p in positives])
        anchors += 1
    return total / anchors


def test_supcon_identical_pair_is_ln2():
    z = np.zeros((3, 4))
    z[:, 0] = 1.0
    assert abs(bevlab.supcon_loss(z, np.array([1, 1, 1]), 0.1) - math.log(2.0)) < 1e-9


def test_supcon_matches_reference_and_gradient_shape():
    rng = np.random.default_rng(4)
    z = rng.normal(size=(8, 5))
    labels = np.array([0, 0, 1, 1, 2, 2, 0, 1])
    assert bevlab.supcon_loss(z, labels, 0.5) == pytest.approx(supcon_reference(z, labels, 0.5), rel=1e-9)
    assert bevlab.supcon_gradient(z, labels, 0.5).shape == (8, 5)


def test_elevation_l1_example():
    assert bevlab.elevation_l1([0.5, 1.0, 9.0], [0.2, 0.7, 0.0], [1, 1, 0]) == pytest.approx(0.3)
    with pytest.raises(bevlab.BevlabError):
        bevlab.elevation_l1([1.0], [0.0], [0])


def test_hungarian_matches_brute_force():
    rng = np.random.default_rng(5)
    for n in range(1, 6):
        cost = rng.uniform(-5, 5, size=(n, n))
        row_to_col, total = bevlab.hungarian(cost)
        best = min(sum(cost[r, p[r]] for r in range(n)) for p in itertools.permutations(range(n)))
        assert total == pytest.approx(best, abs=1e-9)
        assert sorted(row_to_col) == list(range(n))


def test_kmeans_objective_never_increases():
    rng = np.random.default_rng(6)
    x = np.vstack([rng.normal(c, 0.3, size=(40, 2)) for c in ((0, 0), (5, 0), (0, 5))])
    r = bevlab.kmeans(x, 3, 11)
    history = r["objective_history"]
    assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))
    assert len(set(r["assignments"])) == 3


def test_pca_and_unsupervised_eval():
    labels = np.arange(40) % 4
    onehot = np.eye(4)[labels]
    model = bevlab.pca_fit(onehot, 2)
    assert model.transform(onehot).shape == (40, 2)
    r = bevlab.unsup_ssc_eval(onehot, labels, onehot, labels, 4, 7)
    assert r["miou"] == 1.0
    assert list(r["predictions"]) == list(labels)


def test_igmm_merge_prefers_overlap():
    m1 = np.zeros((4, 4), dtype=np.uint16)
    m2 = np.zeros((4, 4), dtype=np.uint16)
    m1[:2, :2] = 3
    m2[:2, :3] = 1
    m2[3, 3] = 2
    r = bevlab.igmm_merge(m1, m2)
    assert r["label_map"] == {1: 3, 2: 4}
    assert r["max_label"] == 4
    assert r["merged"][0, 2] == 3
    assert r["merged"][3, 3] == 4


def test_splat_corner_weights_and_mass():
    # 0.25 m cells: a point on a cell corner spreads exactly a quarter to four cells.
    res = 0.25
    rows, cols = 8, 8
    # Cell centres sit at ((rows - 1 - r) * res, (cols / 2 - c) * res).
    x, y = 3.5 * res, 0.5 * res
    f, w, dropped = bevlab.splat(np.array([[x, y, 0.0]]), np.array([[2.0]]), rows, cols, res)
    assert dropped == 0
    assert sorted(w[w > 0].tolist()) == [0.25] * 4
    assert np.nansum(f[..., 0] * w) == pytest.approx(2.0)


def test_depth_helpers():
    lidar = np.array([[10.0, 10.0], [0.0, 5.0]])
    stereo = np.array([[10.5, 20.0], [3.0, 0.0]])
    kept = bevlab.consistency_filter(lidar, stereo, 0.3)
    assert kept.tolist() == [[10.0, 0.0], [0.0, 5.0]]
    sparse = np.zeros((5, 5))
    sparse[2, 2] = 4.0
    assert np.all(bevlab.idw_infill(sparse, 4)[sparse == 0] == 4.0)
    bins = bevlab.bin_depth(np.array([[0.5, 51.2]]))
    assert bins.shape == (1, 2)


def test_stereo_recovers_a_constant_shift():
    rng = np.random.default_rng(7)
    right = rng.integers(0, 256, size=(32, 64), dtype=np.uint8)
    left = np.zeros_like(right)
    left[:, 5:] = right[:, :-5]
    disp = bevlab.stereo_disparity(left, right, max_disparity=16)
    interior = disp[4:-4, 24:-4]
    assert np.mean(np.abs(interior[np.isfinite(interior)] - 5.0) < 0.5) > 0.95


def test_iou_and_mae():
    gt = np.array([[1, 1], [2, 2]])
    part = np.ones((2, 2), dtype=np.uint8)
    assert bevlab.iou(gt, gt, part)["miou"] == 1.0
    pred = np.array([[0.35, np.nan], [-0.144, np.nan]])
    truth = np.array([[0.3, np.nan], [-0.1, np.nan]])
    assert bevlab.mae(pred, truth, part) == pytest.approx(0.047)


def test_classify_dynamic():
    static = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    query = np.array([[0.05, 0.0, 0.0], [5.0, 5.0, 0.0]])
    assert bevlab.classify_dynamic(query, static, 0.2, 1, 0.2) == [False, True]


def test_errors_surface_as_bevlab_error():
    with pytest.raises(bevlab.BevlabError):
        bevlab.stereo_disparity(np.zeros((4, 4), np.uint8), np.zeros((4, 5), np.uint8))
    assert issubclass(bevlab.BevlabError, ValueError)
