import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bdindex import oracle
from bdindex.errors import QueryError
from bdindex.graph import Graph
from bdindex.hierarchy import build_hierarchy
from bdindex.index import build_index
from bdindex.query import (
    QueryEngine,
    accumulate_tau,
    all_pairs_bd,
    batch_query,
    check_index_matches,
    edge_centrality,
    pair_bds,
    query_bd,
    removal_report,
    sample_pairs,
    IndexGraphMismatchError,
)

from conftest import corpus, path_graph, random_er, random_tree, random_weighted

STRATS = ("separator", "min-degree")


def _index(g, strategy="separator"):
    return build_index(g, build_hierarchy(g, strategy))


@pytest.mark.parametrize("strategy", STRATS)
def test_p3_values(p3, strategy):
    idx = _index(p3, strategy)
    assert query_bd(idx, 0, 1).bd == pytest.approx(2 / 3, abs=1e-12)
    assert query_bd(idx, 0, 2).bd == pytest.approx(2.0, abs=1e-12)
    assert query_bd(idx, 1, 1).bd == 0.0


@pytest.mark.parametrize("strategy", STRATS)
def test_c4_values(c4, strategy):
    idx = _index(c4, strategy)
    assert query_bd(idx, 0, 1).bd == pytest.approx(5 / 16, abs=1e-12)
    assert query_bd(idx, 0, 2).bd == pytest.approx(0.5, abs=1e-12)


def test_single_vertex():
    g = Graph.from_edges(1, [])
    assert query_bd(_index(g), 0, 0).bd == 0.0


def test_tau_is_root_grounded_inverse_column(rng):
    g = random_er(35, rng)
    idx = _index(g)
    Lv, keep = oracle.grounded_laplacian(g, idx.root)
    inv = np.linalg.inv(Lv)
    for s in range(g.n):
        tau = accumulate_tau(idx, s)
        col = np.zeros(g.n)
        if s != idx.root:
            col[keep] = inv[:, list(keep).index(s)]
        np.testing.assert_allclose(tau, col, atol=1e-11)


@pytest.mark.parametrize("strategy", STRATS)
def test_all_pairs_against_pseudoinverse(strategy):
    for name, g in corpus(30, 70, seed=5):
        got = all_pairs_bd(_index(g, strategy))
        ref = oracle.pseudoinverse_bd_all(g)
        rel = np.abs(got - ref) / np.maximum(ref, 1e-300)
        np.fill_diagonal(rel, 0.0)
        assert rel.max() <= 1e-9, name


def test_weighted_graphs(rng):
    for _ in range(8):
        g = random_weighted(int(rng.integers(3, 50)), rng)
        got = all_pairs_bd(_index(g))
        np.testing.assert_allclose(got, oracle.pseudoinverse_bd_all(g), rtol=1e-9, atol=1e-12)


def test_symmetry_is_bitwise(rng):
    g = random_er(60, rng)
    idx = _index(g, "min-degree")
    for s, t in sample_pairs(g.n, 200, seed=1):
        assert query_bd(idx, s, t).bd == query_bd(idx, t, s).bd


def test_square_root_is_a_metric(rng):
    g = random_er(25, rng)
    D = np.sqrt(all_pairs_bd(_index(g)))
    assert np.all(np.diag(D) == 0)
    # triangle inequality over every triple
    assert np.all(D[:, None, :] <= D[:, :, None] + D[None, :, :] + 1e-12)


def test_query_touches_only_ancestor_labels():
    g = path_graph(31)
    idx = _index(g)
    eng = QueryEngine(idx)
    leaf = int(np.flatnonzero(idx.tree.dfs_size == 1)[0])
    _, (lo, hi) = eng.tau_dfs(leaf)
    # only the subtree of the root's child on the leaf's branch is written
    assert hi - lo < g.n


def test_backends_agree(rng):
    g = random_er(80, rng)
    idx = _index(g)
    S, T = np.triu_indices(g.n, 1)
    a = pair_bds(idx, S, T, backend="numba")
    b = pair_bds(idx, S, T, backend="numpy")
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


def test_batch_query_with_workers(rng):
    g = random_er(50, rng)
    idx = _index(g)
    pairs = sample_pairs(g.n, 300, seed=3)
    one = batch_query(idx, pairs, workers=1)
    four = batch_query(idx, pairs, workers=4)
    assert [(r.s, r.t) for r in one] == pairs
    assert [r.bd for r in one] == [r.bd for r in four]
    assert all(r.elapsed >= 0 for r in one)


def test_batch_query_rejects_bad_pair_with_position(p3):
    idx = _index(p3)
    with pytest.raises(QueryError) as exc:
        batch_query(idx, [(0, 1), (0, 9)])
    assert exc.value.position == 1


def test_as_row_uses_external_labels(p3):
    idx = _index(p3)
    row = query_bd(idx, 0, 2).as_row(("a", "b", "c"))
    assert row["s"] == "a" and row["t"] == "c"
    assert set(row) == {"s", "t", "bd", "micros"}


def test_sample_pairs_are_distinct_and_seeded():
    a = sample_pairs(50, 300, seed=42)
    assert a == sample_pairs(50, 300, seed=42)
    assert a != sample_pairs(50, 300, seed=43)
    assert len(set(a)) == 300
    assert all(0 <= s < t < 50 for s, t in a)
    assert len(set(sample_pairs(6, 15, seed=0))) == 15


def test_sample_pairs_too_many():
    with pytest.raises(QueryError):
        sample_pairs(3, 10)


def test_edge_centrality_on_a_tree_matches_oracle(rng):
    g = random_tree(30, rng)
    idx = _index(g)
    ranked = edge_centrality(idx, g)
    assert len(ranked) == g.m
    vals = [bd for _, bd in ranked]
    assert vals == sorted(vals, reverse=True)
    B = oracle.pseudoinverse_bd_all(g)
    for (u, w), bd in ranked:
        assert bd == pytest.approx(B[u, w], rel=1e-9)
    assert edge_centrality(idx, g, top_k=3) == ranked[:3]


def test_removal_report(rng):
    g = random_tree(40, rng)
    ranked = edge_centrality(_index(g), g)
    rep = removal_report(g, ranked, 0.0, seed=1)
    assert rep.removed == 0 and rep.components == 1 and rep.lcc_fraction == 1.0
    rep = removal_report(g, ranked, 0.1, seed=1)
    assert rep.removed == int(0.1 * g.m)
    # removing k tree edges leaves exactly k + 1 components
    assert rep.components == rep.removed + 1
    assert 0 < rep.reachability < 1
    with pytest.raises(ValueError):
        removal_report(g, ranked, 1.5)


def test_mismatch_detection(rng):
    g = random_er(30, rng)
    idx = _index(g)
    check_index_matches(idx, g)
    with pytest.raises(IndexGraphMismatchError):
        check_index_matches(idx, random_er(31, rng))
    h = random_er(30, np.random.default_rng(999))
    with pytest.raises(IndexGraphMismatchError):
        check_index_matches(idx, h)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**31 - 1), st.sampled_from(STRATS))
def test_random_pairs_match_oracle(n, seed, strategy):
    g = random_er(n, np.random.default_rng(seed))
    idx = _index(g, strategy)
    P = oracle.pseudoinverse(g)
    for s, t in sample_pairs(n, min(10, n * (n - 1) // 2), seed=seed):
        d = P[:, s] - P[:, t]
        assert query_bd(idx, s, t).bd == pytest.approx(float(d @ d), rel=1e-9)
