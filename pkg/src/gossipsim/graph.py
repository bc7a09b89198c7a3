"""Selection matrices, their induced graphs and Laplacian spectra.

A selection matrix holds the pairing weights of the gossip process: row i is
the probability distribution node i uses to pick a partner, so every row sums
to one, the diagonal is zero (nobody gossips with themselves) and there are at
least three nodes. The induced graph has an arc (j, i) whenever a_ij > 0,
meaning information can flow from j to i once i selects j.

The spectral quantities that drive the contraction analysis come from the
symmetrized Laplacian D - (A + A^T), where D is diagonal with
d_i = sum_j (a_ij + a_ji).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadParameterError,
    DisconnectedAfterRetriesError,
    EigenFailureError,
    MatrixTooSmallError,
    NegativeEntryError,
    NonzeroDiagonalError,
    NotStochasticError,
)

__all__ = [
    "SelectionMatrix",
    "InducedGraph",
    "SpectralData",
    "validate",
    "induced_graph",
    "is_weakly_connected",
    "spectral",
    "generate",
    "import_matrix_csv",
    "export_matrix_csv",
    "import_matrix_json",
    "export_matrix_json",
]

ROW_SUM_TOL = 1e-9
GENERATOR_MAX_RETRIES = 100


@dataclass(frozen=True, eq=False)
class SelectionMatrix:
    """Validated pairing-weight matrix.

    Attributes
    ----------
    n : int
        Number of nodes, at least 3.
    entries : numpy.ndarray
        (n, n) float array; row-stochastic with a zero diagonal. Treat as
        read-only; `validate` is the only constructor callers should use.
    """

    n: int
    entries: np.ndarray

    def row_cdfs(self) -> np.ndarray:
        """Per-row cumulative distributions used by the pair sampler.

        The tail of each row (at and past its last positive entry) is forced
        to exactly 1.0 so a uniform draw in [0, 1) always lands on an entry
        with positive weight; zero-weight entries occupy zero-width intervals
        and can never be selected.
        """
        cdfs = np.cumsum(self.entries, axis=1)
        for i in range(self.n):
            positive = np.nonzero(self.entries[i] > 0.0)[0]
            cdfs[i, positive[-1]:] = 1.0
        return cdfs


@dataclass(frozen=True, eq=False)
class InducedGraph:
    """Directed graph induced by a selection matrix.

    `has_arc[u, v]` is True when the arc (u, v) exists, i.e. when a_vu > 0:
    node v can select node u, so u's value reaches v.
    """

    n: int
    has_arc: np.ndarray

    def arcs(self) -> list[tuple[int, int]]:
        us, vs = np.nonzero(self.has_arc)
        return list(zip(us.tolist(), vs.tolist()))


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Spectral summary of the symmetrized Laplacian.

    Attributes
    ----------
    degrees : numpy.ndarray
        d_i = sum_j (a_ij + a_ji).
    laplacian : numpy.ndarray
        D - (A + A^T); symmetric positive semidefinite.
    spectrum : numpy.ndarray
        Eigenvalues sorted ascending; the first is (numerically) zero.
    lambda2 : float
        Second-smallest eigenvalue; positive exactly when the induced graph
        is weakly connected.
    lambda_n : float
        Largest eigenvalue; bounded above by 2n.
    a_star : float
        Smallest positive selection weight.
    """

    degrees: np.ndarray
    laplacian: np.ndarray
    spectrum: np.ndarray
    lambda2: float
    lambda_n: float
    a_star: float


def validate(entries: np.ndarray | list[list[float]]) -> SelectionMatrix:
    """Check an array against the selection-matrix contract.

    Parameters
    ----------
    entries : array-like
        Candidate (n, n) weight matrix.

    Returns
    -------
    SelectionMatrix

    Raises
    ------
    MatrixTooSmallError
        Fewer than three nodes or a non-square array.
    NegativeEntryError
        Any weight below zero.
    NonzeroDiagonalError
        Any self-selection weight.
    NotStochasticError
        A row sum farther than 1e-9 from one. Rows are never silently
        renormalized; fixing the input is the caller's job.
    """
    a = np.array(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MatrixTooSmallError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n < 3:
        raise MatrixTooSmallError(f"need at least 3 nodes, got {n}")
    if not np.isfinite(a).all():
        raise BadParameterError("matrix entries must be finite")
    if (a < 0.0).any():
        i, j = np.argwhere(a < 0.0)[0]
        raise NegativeEntryError(f"entry ({i}, {j}) is negative: {a[i, j]}")
    diag = np.diagonal(a)
    if (diag != 0.0).any():
        i = int(np.nonzero(diag)[0][0])
        raise NonzeroDiagonalError(f"diagonal entry ({i}, {i}) is {diag[i]}, must be 0")
    sums = a.sum(axis=1)
    bad = np.abs(sums - 1.0) > ROW_SUM_TOL
    if bad.any():
        i = int(np.nonzero(bad)[0][0])
        raise NotStochasticError(f"row {i} sums to {sums[i]:.12g}, expected 1")
    a.setflags(write=False)
    return SelectionMatrix(n=n, entries=a)


def induced_graph(matrix: SelectionMatrix) -> InducedGraph:
    """Positivity pattern of the matrix as a directed graph."""
    return InducedGraph(n=matrix.n, has_arc=(matrix.entries > 0.0).T)


def is_weakly_connected(graph: InducedGraph) -> bool:
    """True when the graph is connected after dropping arc directions."""
    und = graph.has_arc | graph.has_arc.T
    reached = np.zeros(graph.n, dtype=bool)
    reached[0] = True
    frontier = reached.copy()
    while frontier.any():
        nxt = und[frontier].any(axis=0) & ~reached
        reached |= nxt
        frontier = nxt
    return bool(reached.all())


def spectral(matrix: SelectionMatrix) -> SpectralData:
    """Degrees, symmetrized Laplacian and its eigenvalues.

    Raises
    ------
    EigenFailureError
        If the symmetric eigensolver fails to converge (essentially never
        for the sizes this package targets, but surfaced rather than hidden).
    """
    a = matrix.entries
    sym = a + a.T
    degrees = sym.sum(axis=1)
    laplacian = np.diag(degrees) - sym
    try:
        spectrum = np.linalg.eigvalsh(laplacian)
    except np.linalg.LinAlgError as exc:
        raise EigenFailureError(f"eigensolver failed: {exc}") from exc
    positive = a[a > 0.0]
    return SpectralData(
        degrees=degrees,
        laplacian=laplacian,
        spectrum=spectrum,
        lambda2=float(spectrum[1]),
        lambda_n=float(spectrum[-1]),
        a_star=float(positive.min()),
    )


# ---------------------------------------------------------------------------
# topology generation
# ---------------------------------------------------------------------------

def _ring_adjacency(n: int) -> np.ndarray:
    adj = np.zeros((n, n), dtype=bool)
    for i in range(n):
        adj[i, (i + 1) % n] = True
        adj[i, (i - 1) % n] = True
    return adj


def _normalize_rows(adj: np.ndarray) -> np.ndarray:
    deg = adj.sum(axis=1)
    entries = np.zeros(adj.shape, dtype=float)
    for i in range(adj.shape[0]):
        if deg[i] > 0:
            entries[i, adj[i]] = 1.0 / deg[i]
    return entries


def generate(kind: str, n: int, seed: int | None = None, **params) -> SelectionMatrix:
    """Build a selection matrix from a named undirected topology.

    The undirected graph is converted to selection weights by uniform row
    normalization over each node's neighbors. Random topologies are redrawn
    until connected (at most 100 attempts).

    Parameters
    ----------
    kind : str
        One of "complete", "ring", "erdos_renyi", "watts_strogatz",
        "barabasi_albert".
    n : int
        Node count, at least 3.
    seed : int, optional
        Seed for the random kinds; attempts consume successive child seeds
        so retries stay reproducible.
    **params
        erdos_renyi: p (edge probability). watts_strogatz: k_nn (even ring
        degree), p_rewire. barabasi_albert: m (edges per new node).

    Raises
    ------
    BadParameterError
        Unknown kind or out-of-range parameter.
    DisconnectedAfterRetriesError
        No connected draw within the retry budget.
    """
    if n < 3:
        raise MatrixTooSmallError(f"need at least 3 nodes, got {n}")

    if kind == "complete":
        adj = ~np.eye(n, dtype=bool)
        return validate(_normalize_rows(adj))
    if kind == "ring":
        return validate(_normalize_rows(_ring_adjacency(n)))

    import networkx as nx

    rng = np.random.default_rng(seed)

    def draw(attempt_seed: int) -> "nx.Graph":
        if kind == "erdos_renyi":
            p = params.get("p")
            if p is None or not 0.0 <= p <= 1.0:
                raise BadParameterError(f"erdos_renyi needs p in [0, 1], got {p}")
            return nx.gnp_random_graph(n, p, seed=attempt_seed)
        if kind == "watts_strogatz":
            k_nn = params.get("k_nn")
            p_rewire = params.get("p_rewire")
            if k_nn is None or not 2 <= k_nn < n or k_nn % 2 != 0:
                raise BadParameterError(
                    f"watts_strogatz needs even k_nn with 2 <= k_nn < n, got {k_nn}"
                )
            if p_rewire is None or not 0.0 <= p_rewire <= 1.0:
                raise BadParameterError(
                    f"watts_strogatz needs p_rewire in [0, 1], got {p_rewire}"
                )
            return nx.watts_strogatz_graph(n, k_nn, p_rewire, seed=attempt_seed)
        if kind == "barabasi_albert":
            m = params.get("m")
            if m is None or not 1 <= m < n:
                raise BadParameterError(
                    f"barabasi_albert needs 1 <= m < n, got {m}"
                )
            return nx.barabasi_albert_graph(n, m, seed=attempt_seed)
        raise BadParameterError(f"unknown topology kind {kind!r}")

    for _ in range(GENERATOR_MAX_RETRIES):
        g = draw(int(rng.integers(0, 2**31 - 1)))
        if nx.is_connected(g):
            adj = np.zeros((n, n), dtype=bool)
            for u, v in g.edges:
                adj[u, v] = True
                adj[v, u] = True
            return validate(_normalize_rows(adj))
    raise DisconnectedAfterRetriesError(
        f"no connected {kind} graph in {GENERATOR_MAX_RETRIES} attempts (n={n}, {params})"
    )


# ---------------------------------------------------------------------------
# import / export
# ---------------------------------------------------------------------------

def export_matrix_csv(matrix: SelectionMatrix, path: str | Path) -> None:
    """Write row-major CSV with a leading `# n=<int>` comment."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# n={matrix.n}\n")
        writer = csv.writer(fh)
        for row in matrix.entries:
            writer.writerow([f"{v:.17g}" for v in row])


def import_matrix_csv(path: str | Path) -> SelectionMatrix:
    """Read a matrix written by `export_matrix_csv` (comment line optional)."""
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        for record in csv.reader(fh):
            if not record or record[0].lstrip().startswith("#"):
                continue
            rows.append([float(v) for v in record])
    return validate(rows)


def export_matrix_json(matrix: SelectionMatrix, path: str | Path) -> None:
    payload = {"n": matrix.n, "rows": matrix.entries.tolist()}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def import_matrix_json(path: str | Path) -> SelectionMatrix:
    payload = json.loads(Path(path).read_text())
    if not isinstance(payload, dict) or "rows" not in payload:
        raise BadParameterError("matrix JSON must be an object with a 'rows' key")
    m = validate(payload["rows"])
    declared = payload.get("n")
    if declared is not None and declared != m.n:
        raise BadParameterError(f"declared n={declared} but rows give n={m.n}")
    return m
