import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bdindex.errors import (
    DisconnectedGraphError,
    EmptyGraphError,
    GraphFormatError,
    SelfLoopError,
)
from bdindex.graph import Graph, is_connected, load_edge_list, write_edge_list

from conftest import grid_graph, random_er


def test_plain_loader_assigns_ids_by_first_appearance():
    g = load_edge_list(b"# comment\n10 20\n20 30\n\n% other\n30 10 2.5\n")
    assert g.labels == ("10", "20", "30")
    assert g.n == 3 and g.m == 3
    assert g.neighbors(0) == [(1, 1.0), (2, 2.5)]
    assert g.degrees.tolist() == [3.5, 2.0, 3.5]


def test_reciprocal_duplicates_collapse():
    g = load_edge_list(b"0 1\n1 0\n0 1\n1 2\n")
    assert g.m == 2


def test_conflicting_duplicate_weights_rejected_with_line():
    with pytest.raises(GraphFormatError) as exc:
        load_edge_list(b"0 1 1\n1 2\n1 0 3\n")
    assert exc.value.line == 3


def test_self_loop_reports_line():
    with pytest.raises(SelfLoopError) as exc:
        load_edge_list(b"0 1\n2 2\n")
    assert exc.value.line == 2


def test_disconnected_input_names_two_vertices():
    with pytest.raises(DisconnectedGraphError) as exc:
        load_edge_list(b"0 1\n2 3\n")
    msg = str(exc.value)
    assert "0" in msg and "2" in msg


@pytest.mark.parametrize("text", [b"", b"# nothing\n"])
def test_empty_input(text):
    with pytest.raises(EmptyGraphError):
        load_edge_list(text)


@pytest.mark.parametrize("text,line", [
    (b"0 1\n0 x\n", 2),
    (b"0 1 -1\n", 1),
    (b"0 1 nan\n", 1),
    (b"0 1 2 3\n", 1),
])
def test_malformed_lines(text, line):
    with pytest.raises(GraphFormatError) as exc:
        load_edge_list(text)
    assert exc.value.line == line


def test_integer_tokens_are_normalised():
    g = load_edge_list(b"007 8\n8 9\n")
    assert g.labels == ("7", "8", "9")


def test_dimacs_loader():
    text = b"c example\np sp 3 4\na 1 2 1\na 2 1 1\na 2 3 2\na 3 2 2\n"
    g = load_edge_list(text, format="dimacs")
    assert g.n == 3 and g.m == 2
    assert g.weights.max() == 2.0


def test_dimacs_isolated_vertex_is_disconnected():
    with pytest.raises(DisconnectedGraphError):
        load_edge_list(b"p sp 3 1\na 1 2 1\n", format="dimacs")


def test_dimacs_requires_header():
    with pytest.raises(GraphFormatError):
        load_edge_list(b"a 1 2 1\n", format="dimacs")


def test_path_and_stream_sources(tmp_path):
    p = tmp_path / "g.txt"
    p.write_bytes(b"0 1\n1 2\n")
    a = load_edge_list(p)
    b = load_edge_list(str(p))
    c = load_edge_list(io.BytesIO(b"0 1\n1 2\n"))
    assert a.labels == b.labels == c.labels


def test_arrays_are_read_only():
    g = grid_graph(2, 3)
    with pytest.raises(ValueError):
        g.degrees[0] = 5


def test_handshake_identity(rng):
    for _ in range(20):
        g = random_er(int(rng.integers(2, 60)), rng)
        assert g.degrees.sum() == pytest.approx(g.weights.sum())
        assert len(g.indices) == 2 * g.m


def test_laplacian_rows_sum_to_zero(rng):
    g = random_er(30, rng)
    L = g.laplacian()
    np.testing.assert_allclose(L.sum(axis=1), 0.0, atol=1e-12)
    np.testing.assert_allclose(L, L.T)


def test_from_edges_unchecked_allows_disconnected():
    g = Graph.from_edges(4, [(0, 1), (2, 3)], check_connected=False)
    assert not is_connected(g)


def test_write_then_read_roundtrip(rng, tmp_path):
    g = random_er(25, rng)
    buf = io.BytesIO()
    write_edge_list(g, buf)
    h = load_edge_list(buf.getvalue())
    ea = {(g.labels[a], g.labels[b]) for a, b in zip(*g.edges()[:2])}
    eb = {(h.labels[a], h.labels[b]) for a, b in zip(*h.edges()[:2])}
    norm = lambda es: {tuple(sorted(e)) for e in es}
    assert norm(ea) == norm(eb)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 25), st.integers(0, 2**31 - 1))
def test_line_order_does_not_change_the_graph(n, seed):
    rng = np.random.default_rng(seed)
    g = random_er(n, rng)
    u, w, _ = g.edges()
    lines = [f"{a} {b}" for a, b in zip(u, w)]
    perm = rng.permutation(len(lines))
    h = load_edge_list("\n".join(lines[i] for i in perm).encode())
    # same edge set once ids are mapped back through the labels
    to_ext = lambda gr: {tuple(sorted((gr.labels[a], gr.labels[b]), key=int))
                         for a, b in zip(*gr.edges()[:2])}
    assert to_ext(g) == to_ext(h)
    assert sorted(h.degrees.tolist()) == sorted(g.degrees.tolist())
