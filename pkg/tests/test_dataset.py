import numpy as np
import pytest

from gatcsbm.csbm import dump_sample_tsv
from gatcsbm.dataset import (
    ExternalGraph,
    ParseError,
    evaluate_real_task,
    injection_direction,
    load_external_graph,
    one_vs_all_mean_shift,
)

from conftest import make_sample


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def _toy(tmp_path, edges="0\t1\n", features="0\t1.0\t2.0\n1\t3.0\t4.0\n2\t5.0\t6.0\n",
         labels="0\t0\n1\t1\n2\t1\n", masks=None):
    paths = [_write(tmp_path, "features.tsv", features), _write(tmp_path, "edges.tsv", edges),
             _write(tmp_path, "labels.tsv", labels)]
    if masks is not None:
        paths.append(_write(tmp_path, "masks.tsv", masks))
    return paths


def test_toy_graph(tmp_path):
    g = load_external_graph(*_toy(tmp_path))
    assert (g.n, g.d) == (3, 2)
    assert g.edges.tolist() == [[0, 1]]
    assert g.labels.tolist() == [0, 1, 1]
    assert g.masks is None


def test_edges_normalized(tmp_path):
    g = load_external_graph(*_toy(tmp_path, edges="2\t0\n1\t0\n"))
    assert g.edges.tolist() == [[0, 1], [0, 2]]


def test_self_loop_reports_line(tmp_path):
    with pytest.raises(ParseError, match="self-loop at line 2"):
        load_external_graph(*_toy(tmp_path, edges="0\t1\n2\t2\n"))


@pytest.mark.parametrize("kwargs, pattern", [
    ({"edges": "0\t1\n1\t0\n"}, "duplicate edge"),
    ({"edges": "0\t7\n"}, "unknown node id 7"),
    ({"features": "0\t1.0\t2.0\n1\t3.0\n2\t5.0\t6.0\n"}, "ragged row"),
    ({"features": "0\t1.0\n1\tx\n2\t1.0\n"}, "non-numeric"),
    ({"labels": "0\t0\n1\t1\n"}, "no entry for node 2"),
    ({"masks": "0\ttrain\n1\tdev\n2\ttest\n"}, "split must be one of"),
])
def test_parse_errors(tmp_path, kwargs, pattern):
    with pytest.raises(ParseError, match=pattern) as exc:
        load_external_graph(*_toy(tmp_path, **kwargs))
    assert isinstance(exc.value, ValueError)


def test_dump_load_round_trip(tmp_path):
    _, s = make_sample(n=120, p=0.2, q=0.05)
    paths = dump_sample_tsv(s, tmp_path)
    g = load_external_graph(paths["features"], paths["edges"], paths["labels"])
    assert np.array_equal(g.features, s.features)  # repr floats are exact
    assert np.array_equal(g.labels, s.labels)
    assert np.array_equal(g.edges, s.edges())
    back = g.to_sample()
    assert np.array_equal(back.indptr, s.indptr) and np.array_equal(back.indices, s.indices)


def _multi_class_graph(n=240, d=6, seed=0):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 3, size=n)
    centers = rng.normal(scale=0.5, size=(3, d))
    feats = centers[labels] + rng.normal(size=(n, d))
    iu, ju = np.triu_indices(n, 1)
    prob = np.where(labels[iu] == labels[ju], 0.12, 0.03)
    keep = rng.random(iu.size) < prob
    edges = np.stack([iu[keep], ju[keep]], axis=1)
    return ExternalGraph(feats, edges, labels)


def test_mean_shift_zero_centers_both_groups():
    g = _multi_class_graph()
    task = one_vs_all_mean_shift(g, 1, np.zeros(g.d))
    pos = task.binary_labels == 1
    assert np.all(np.abs(task.shifted_features[pos].mean(axis=0)) <= 1e-6)
    assert np.all(np.abs(task.shifted_features[~pos].mean(axis=0)) <= 1e-6)


@pytest.mark.parametrize("scale", [0.01, 1.0, 50.0])
def test_mean_shift_invariant_and_idempotent(scale):
    g = _multi_class_graph(seed=3)
    mu = scale * np.arange(1.0, g.d + 1)
    task = one_vs_all_mean_shift(g, 2, mu)
    pos = task.binary_labels == 1
    assert np.all(np.abs(task.shifted_features[pos].mean(axis=0) - mu) <= 1e-6)
    assert np.all(np.abs(task.shifted_features[~pos].mean(axis=0) + mu) <= 1e-6)
    again = one_vs_all_mean_shift(ExternalGraph(task.shifted_features, g.edges, g.labels), 2, mu)
    assert np.max(np.abs(again.shifted_features - task.shifted_features)) <= 1e-6


def test_identical_features_project_to_plus_minus_norm():
    feats = np.tile([0.3, -1.2, 2.0], (10, 1))
    labels = np.array([0] * 5 + [1] * 5)
    g = ExternalGraph(feats, np.empty((0, 2), dtype=np.int64), labels)
    mu = np.array([3.0, 0.0, 4.0])
    task = one_vs_all_mean_shift(g, 1, mu)
    proj = task.shifted_features @ (mu / np.linalg.norm(mu))
    assert proj[labels == 1].mean() == pytest.approx(5.0)
    assert proj[labels == 0].mean() == pytest.approx(-5.0)


def test_mean_shift_errors():
    g = _multi_class_graph()
    with pytest.raises(ValueError):
        one_vs_all_mean_shift(g, 9, np.zeros(g.d))
    with pytest.raises(ValueError):
        one_vs_all_mean_shift(g, 0, np.zeros(g.d + 1))
    single = ExternalGraph(g.features, g.edges, np.zeros(g.n, dtype=np.int64))
    with pytest.raises(ValueError):
        one_vs_all_mean_shift(single, 0, np.zeros(g.d))


def test_injection_direction_fallback():
    g = ExternalGraph(np.ones((4, 3)), np.empty((0, 2), dtype=np.int64), np.array([0, 0, 1, 1]))
    assert injection_direction(g, 1).tolist() == [1.0, 0.0, 0.0]
    u = injection_direction(_multi_class_graph(), 0)
    assert np.linalg.norm(u) == pytest.approx(1.0)


def _series(recs, model, metric):
    return [r.value for r in sorted(recs) if r.model == model and r.metric == metric]


def test_real_task_monotone_in_mean_norm():
    g = _multi_class_graph(n=300, seed=1)
    task = one_vs_all_mean_shift(g, 0, np.zeros(g.d))
    grid = [0.1, 0.3, 1.0, 3.0, 10.0, 30.0]
    recs = evaluate_real_task(task, mu_norm_grid=grid)
    edge = _series(recs, "mlp-psi", "edge_acc")
    assert len(edge) == len(grid)
    assert all(b >= a for a, b in zip(edge, edge[1:]))
    assert edge[-1] == 1.0
    intra = _series(recs, "mlp-psi", "gamma_intra_mean")
    inter = _series(recs, "mlp-psi", "gamma_inter_mean")
    ratio = [a / b for a, b in zip(intra, inter)]
    assert all(b > a for a, b in zip(ratio, ratio[1:]))
    assert ratio[-1] > 100
    assert _series(recs, "mlp-psi", "gamma_intra_std") and _series(recs, "mlp-psi", "gamma_inter_std")


def test_real_task_small_norm_is_near_uniform():
    g = _multi_class_graph(n=300, seed=2)
    task = one_vs_all_mean_shift(g, 1, np.zeros(g.d))
    recs = evaluate_real_task(task, mu_norm_grid=[1e-6])
    ref = _series(recs, "mlp-psi", "gamma_uniform_ref")[0]
    for metric in ("gamma_intra_mean", "gamma_inter_mean"):
        assert _series(recs, "mlp-psi", metric)[0] == pytest.approx(ref, rel=0.1)


def test_real_task_masks():
    g = _multi_class_graph(n=90)
    all_train = ExternalGraph(g.features, g.edges, g.labels, np.array(["train"] * g.n))
    recs = evaluate_real_task(one_vs_all_mean_shift(all_train, 0, np.zeros(g.d)), mu_norm_grid=[1.0])
    assert {r.metric for r in recs} == {"skipped"}
    split = np.array(["train", "val", "test"] * (g.n // 3))
    part = ExternalGraph(g.features, g.edges, g.labels, split)
    recs = evaluate_real_task(one_vs_all_mean_shift(part, 0, np.zeros(g.d)), mu_norm_grid=[1.0])
    mu = 1.0 * injection_direction(g, 0)
    shifted = one_vs_all_mean_shift(g, 0, mu)
    keep = split != "train"
    pred = (shifted.shifted_features @ mu > 0).astype(int)
    expected = np.mean(pred[keep] == shifted.binary_labels[keep])
    assert _series(recs, "linear", "node_acc") == [pytest.approx(expected, abs=1e-15)]


def test_masks_loaded(tmp_path):
    g = load_external_graph(*_toy(tmp_path, masks="0\ttrain\n1\tval\n2\ttest\n"))
    assert g.masks.tolist() == ["train", "val", "test"]
