import numpy as np
import pytest

from gossipsim.errors import (
    BadParameterError,
    MatrixTooSmallError,
    NegativeEntryError,
    NonzeroDiagonalError,
    NotStochasticError,
)
from gossipsim.graph import (
    SelectionMatrix,
    export_matrix_csv,
    export_matrix_json,
    generate,
    import_matrix_csv,
    import_matrix_json,
    induced_graph,
    is_weakly_connected,
    spectral,
    validate,
)

from conftest import A_STAR, LAMBDA2, LAMBDA_N, REF_ROWS, SPECTRUM


def two_triangles():
    """Six nodes, two disjoint directed triangles: valid but disconnected."""
    m = np.zeros((6, 6))
    for base in (0, 3):
        for i in range(3):
            m[base + i, base + (i + 1) % 3] = 1.0
    return m


def test_validate_accepts_reference_matrix(ref_matrix):
    assert ref_matrix.n == 4
    assert np.array_equal(ref_matrix.entries, np.array(REF_ROWS))


def test_validate_rejects_bad_matrices():
    with pytest.raises(MatrixTooSmallError):
        validate([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(MatrixTooSmallError):
        validate(np.ones((3, 4)))
    bad = np.array(REF_ROWS)
    bad[0, 1] = -0.5
    bad[0, 3] = 1.5
    with pytest.raises(NegativeEntryError):
        validate(bad)
    diag = np.array(REF_ROWS)
    diag[2, 2] = diag[2, 3]
    diag[2, 3] = 0.0
    with pytest.raises(NonzeroDiagonalError):
        validate(diag)
    short = np.array(REF_ROWS)
    short[1, 2] = 0.1
    with pytest.raises(NotStochasticError):
        validate(short)


def test_validate_row_sum_tolerance():
    rows = np.array(REF_ROWS)
    rows[0, 1] += 1e-10
    m = validate(rows)
    assert isinstance(m, SelectionMatrix)


def test_row_cdfs_skip_zero_entries(ref_matrix):
    cdfs = ref_matrix.row_cdfs()
    assert np.all(cdfs[:, -1] == 1.0)
    # Row 0 is [0, 1/2, 0, 1/2]: zero-weight entries get zero-width intervals.
    np.testing.assert_array_equal(cdfs[0], [0.0, 0.5, 0.5, 1.0])
    # searchsorted-right can therefore never return a zero-weight partner
    for u in np.linspace(0.0, 1.0 - 1e-12, 97):
        j = int(np.searchsorted(cdfs[0], u, side="right"))
        assert ref_matrix.entries[0, j] > 0.0


def test_induced_graph_arc_direction(ref_matrix):
    g = induced_graph(ref_matrix)
    # a_20 > 0 (node 2 can pick node 0), so node 0's value reaches node 2
    assert g.has_arc[0, 2]
    assert not g.has_arc[2, 0]  # a_02 == 0: node 0 never picks node 2


def test_weak_connectivity():
    assert is_weakly_connected(induced_graph(validate(REF_ROWS)))
    assert not is_weakly_connected(induced_graph(validate(two_triangles())))
    # one-directional chain is still weakly connected
    chain = np.zeros((4, 4))
    for i in range(3):
        chain[i, i + 1] = 1.0
    chain[3, 0] = 1.0
    assert is_weakly_connected(induced_graph(validate(chain)))


def test_spectral_pinned_reference_values(ref_matrix):
    sp = spectral(ref_matrix)
    assert sp.lambda2 == pytest.approx(LAMBDA2, abs=1e-10)
    assert sp.lambda_n == pytest.approx(LAMBDA_N, abs=1e-10)
    assert sp.a_star == A_STAR
    assert sp.spectrum == pytest.approx(SPECTRUM, abs=1e-10)
    assert abs(sp.spectrum[0]) < 1e-9


def test_spectral_structure(ref_matrix):
    sp = spectral(ref_matrix)
    a = ref_matrix.entries
    np.testing.assert_allclose(sp.degrees, (a + a.T).sum(axis=1), atol=1e-15)
    np.testing.assert_allclose(sp.laplacian, sp.laplacian.T, atol=0)
    # PSD with the all-ones kernel
    np.testing.assert_allclose(sp.laplacian @ np.ones(4), 0.0, atol=1e-12)
    assert sp.lambda_n <= 2 * ref_matrix.n


def test_spectral_disconnected_has_zero_lambda2():
    sp = spectral(validate(two_triangles()))
    assert abs(sp.lambda2) < 1e-9


@pytest.mark.parametrize("kind,params", [
    ("complete", {}),
    ("ring", {}),
    ("erdos_renyi", {"p": 0.4}),
    ("watts_strogatz", {"k_nn": 4, "p_rewire": 0.2}),
    ("barabasi_albert", {"m": 2}),
])
def test_generate_valid_and_connected(kind, params):
    m = generate(kind, 10, seed=3, **params)
    assert m.n == 10
    assert is_weakly_connected(induced_graph(m))
    assert spectral(m).lambda2 > 1e-9


def test_generate_deterministic_with_seed():
    a = generate("erdos_renyi", 12, seed=11, p=0.3)
    b = generate("erdos_renyi", 12, seed=11, p=0.3)
    assert np.array_equal(a.entries, b.entries)


def test_generate_structure():
    ring = generate("ring", 6)
    np.testing.assert_allclose(np.sort(ring.entries, axis=1)[:, -2:], 0.5)
    comp = generate("complete", 5)
    off = comp.entries[~np.eye(5, dtype=bool)]
    np.testing.assert_allclose(off, 0.25)


def test_generate_parameter_errors():
    with pytest.raises(BadParameterError):
        generate("erdos_renyi", 8, seed=0, p=1.5)
    with pytest.raises(BadParameterError):
        generate("watts_strogatz", 8, seed=0, k_nn=3, p_rewire=0.1)
    with pytest.raises(BadParameterError):
        generate("no_such_kind", 8)
    with pytest.raises(MatrixTooSmallError):
        generate("complete", 2)


def test_matrix_roundtrip_csv_json(tmp_path, ref_matrix):
    p_csv = tmp_path / "m.csv"
    p_json = tmp_path / "m.json"
    export_matrix_csv(ref_matrix, p_csv)
    export_matrix_json(ref_matrix, p_json)
    assert np.array_equal(import_matrix_csv(p_csv).entries, ref_matrix.entries)
    assert np.array_equal(import_matrix_json(p_json).entries, ref_matrix.entries)


def test_matrix_json_declared_n_mismatch(tmp_path, ref_matrix):
    p = tmp_path / "m.json"
    export_matrix_json(ref_matrix, p)
    doc = p.read_text().replace('"n": 4', '"n": 5')
    p.write_text(doc)
    with pytest.raises(BadParameterError):
        import_matrix_json(p)
