import math

import numpy as np
import pytest

from bdindex.graph import Graph, is_connected


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def grid_graph(rows: int, cols: int) -> Graph:
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph.from_edges(rows * cols, edges)


def star_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(0, i) for i in range(1, n)])


def random_tree(n: int, rng: np.random.Generator) -> Graph:
    return Graph.from_edges(n, [(i, int(rng.integers(0, i))) for i in range(1, n)])


def random_er(n: int, rng: np.random.Generator, p: float | None = None) -> Graph:
    """Connected Erdos-Renyi sample; a random spanning path is added if a draw comes out disconnected."""
    if p is None:
        p = min(1.0, 2 * math.log(max(n, 2)) / n)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    edges = set(zip(iu[keep].tolist(), ju[keep].tolist()))
    g = Graph.from_edges(n, sorted(edges), check_connected=False)
    if not is_connected(g):
        perm = rng.permutation(n)
        for a, b in zip(perm[:-1], perm[1:]):
            edges.add((min(a, b), max(a, b)))
        g = Graph.from_edges(n, sorted(edges))
    return g


def random_grid(n: int, rng: np.random.Generator) -> Graph:
    rows = int(rng.integers(1, max(2, int(math.isqrt(n))) + 1))
    return grid_graph(rows, max(1, n // rows))


def random_weighted(n: int, rng: np.random.Generator) -> Graph:
    g = random_er(n, rng)
    u, w, _ = g.edges()
    wt = rng.uniform(0.25, 4.0, len(u))
    return Graph.from_edges(n, list(zip(u.tolist(), w.tolist(), wt.tolist())))


def corpus(count: int, n_max: int, seed: int, n_min: int = 2) -> list[tuple[str, Graph]]:
    """Mixed corpus cycling through ER, grid and tree families."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        kind = ("er", "grid", "tree")[i % 3]
        if kind == "er":
            g = random_er(n, rng)
        elif kind == "grid":
            g = random_grid(n, rng)
        else:
            g = random_tree(n, rng)
        out.append((f"{kind}-{g.n}-{i}", g))
    return out


def graph_with_cut_vertex(n: int, rng: np.random.Generator) -> tuple[Graph, int]:
    """Two random blobs glued at one vertex; returns the graph and the shared vertex."""
    a = max(2, n // 2)
    b = n - a + 1
    left = random_er(a, rng)
    right = random_er(b, rng)
    lu, lw, _ = left.edges()
    ru, rw, _ = right.edges()
    cut = a - 1
    edges = list(zip(lu.tolist(), lw.tolist()))
    edges += [(int(x) + cut, int(y) + cut) for x, y in zip(ru, rw)]
    return Graph.from_edges(a + b - 1, edges), cut


@pytest.fixture
def p3() -> Graph:
    return path_graph(3)


@pytest.fixture
def c4() -> Graph:
    return cycle_graph(4)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
