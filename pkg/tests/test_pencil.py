import numpy as np
import pytest

from farcast import (
    DegeneracyWarning,
    EigenSolverError,
    Fn,
    Grid,
    GridMismatchError,
    LinOp,
    NotPositiveDefiniteError,
    inner,
    rayleigh,
    solve_pencil,
)
from oracles import brute_force_pencil


def random_pencil(grid, seed, psd_m=False):
    m = grid.count
    rng = np.random.default_rng(seed)
    s = rng.standard_normal((m, m))
    m_mat = s @ s.T if psd_m else 0.5 * (s + s.T)
    a = rng.standard_normal((m, m))
    n_mat = a @ a.T + 0.5 * np.eye(m)
    return (
        LinOp(grid, m_mat, symmetric=True),
        LinOp(grid, n_mat, symmetric=True),
    )


def test_identity_pencil_diagonal_case():
    g = Grid(0.0, 1.0, 2)
    m_op = LinOp(g, np.diag([2.0, 1.0]), symmetric=True)
    n_op = LinOp.identity(g)
    res = solve_pencil(m_op, n_op, k=2)
    np.testing.assert_allclose(res.eigenvalues, [2.0, 1.0], rtol=0, atol=1e-14)
    np.testing.assert_allclose(res.vectors[0].values, [1.0, 0.0], rtol=0, atol=1e-14)
    np.testing.assert_allclose(res.vectors[1].values, [0.0, 1.0], rtol=0, atol=1e-14)


def test_equal_operators_give_unit_eigenvalues_and_warn():
    g = Grid(0.0, 0.5, 3)
    rng = np.random.default_rng(5)
    a = rng.standard_normal((3, 3))
    n_mat = a @ a.T + np.eye(3)
    m_op = LinOp(g, n_mat, symmetric=True)
    n_op = LinOp(g, n_mat, symmetric=True)
    with pytest.warns(DegeneracyWarning):
        res = solve_pencil(m_op, n_op, k=2)
    np.testing.assert_allclose(res.eigenvalues, [1.0, 1.0], rtol=1e-12)


def test_distinct_spectrum_does_not_warn(recwarn):
    g = Grid(0.0, 1.0, 3)
    m_op = LinOp(g, np.diag([3.0, 2.0, 1.0]), symmetric=True)
    res = solve_pencil(m_op, LinOp.identity(g), k=3)
    assert not [w for w in recwarn if issubclass(w.category, DegeneracyWarning)]
    np.testing.assert_allclose(res.eigenvalues, [3.0, 2.0, 1.0], atol=1e-14)


@pytest.mark.parametrize("m,seed", [(3, 0), (8, 1), (20, 2), (50, 3)])
def test_eigenvalues_match_brute_force(m, seed):
    g = Grid(0.0, 0.3, m)
    m_op, n_op = random_pencil(g, seed)
    res = solve_pencil(m_op, n_op, k=m)
    want = brute_force_pencil(m_op.mat, n_op.mat)
    scale = np.max(np.abs(want))
    np.testing.assert_allclose(res.eigenvalues, want, rtol=0, atol=1e-10 * scale)


@pytest.mark.parametrize("seed", range(4))
def test_vectors_satisfy_pencil_equation(seed):
    g = Grid(0.0, 0.7, 12)
    m_op, n_op = random_pencil(g, 100 + seed)
    res = solve_pencil(m_op, n_op, k=5)
    for lam, vec in zip(res.eigenvalues, res.vectors):
        resid = m_op.apply(vec) - lam * n_op.apply(vec)
        scale = max(1.0, abs(lam)) * max(np.linalg.norm(n_op.mat), 1.0)
        assert np.max(np.abs(resid.values)) <= 1e-9 * scale


@pytest.mark.parametrize("seed", range(4))
def test_vectors_are_n_orthonormal(seed):
    g = Grid(0.0, 0.7, 12)
    m_op, n_op = random_pencil(g, 200 + seed)
    res = solve_pencil(m_op, n_op, k=6)
    for i, vi in enumerate(res.vectors):
        for j, vj in enumerate(res.vectors):
            got = inner(vi, n_op.apply(vj))
            assert got == pytest.approx(1.0 if i == j else 0.0, abs=1e-8)


def test_whitened_matrix_orthonormalizes_n():
    g = Grid(0.0, 2.0, 9)
    m_op, n_op = random_pencil(g, 33)
    res = solve_pencil(m_op, n_op, k=4)
    b = res.whitened_matrix()
    assert b.shape == (9, 4)
    gram = b.T @ n_op.mat @ b
    np.testing.assert_allclose(gram, np.eye(4), rtol=0, atol=1e-8)


def test_sign_convention_pins_largest_component_positive():
    g = Grid(0.0, 1.0, 3)
    m_op = LinOp(g, np.diag([5.0, 2.0, 1.0]), symmetric=True)
    res = solve_pencil(m_op, LinOp.identity(g), k=3)
    for vec in res.vectors:
        assert vec.values[np.argmax(np.abs(vec.values))] > 0


def test_eigenvalues_decrease_as_shift_grows():
    # with M held fixed and positive semidefinite, inflating N = N0 + alpha I
    # shrinks every generalized eigenvalue
    g = Grid(0.0, 1.0, 6)
    m_op, n_op = random_pencil(g, 9, psd_m=True)
    tops = []
    for alpha in (0.0, 0.5, 2.0, 10.0):
        res = solve_pencil(m_op, n_op.add_identity(alpha), k=1)
        tops.append(res.eigenvalues[0])
    assert all(a > b for a, b in zip(tops, tops[1:]))


def test_eigenvalues_continuous_in_shift():
    g = Grid(0.0, 1.0, 5)
    m_op, n_op = random_pencil(g, 10, psd_m=True)
    base = solve_pencil(m_op, n_op.add_identity(1.0), k=3).eigenvalues
    bumped = solve_pencil(m_op, n_op.add_identity(1.0 + 1e-9), k=3).eigenvalues
    np.testing.assert_allclose(bumped, base, rtol=1e-7)


# ----------------------------------------------------------------------
# rayleigh quotient


def test_rayleigh_definition_and_scale_invariance():
    g = Grid(0.0, 0.5, 4)
    m_op, n_op = random_pencil(g, 44)
    rng = np.random.default_rng(45)
    b = Fn(g, rng.standard_normal(4))
    got = rayleigh(m_op, n_op, b)
    want = inner(b, m_op.apply(b)) / inner(b, n_op.apply(b))
    assert got == pytest.approx(want, rel=1e-12)
    assert rayleigh(m_op, n_op, -3.7 * b) == pytest.approx(got, rel=1e-12)


def test_rayleigh_extremes_bracket_spectrum():
    g = Grid(0.0, 1.0, 5)
    m_op, n_op = random_pencil(g, 46)
    res = solve_pencil(m_op, n_op, k=5)
    top, bottom = res.eigenvalues[0], res.eigenvalues[-1]
    rng = np.random.default_rng(47)
    vals = [
        rayleigh(m_op, n_op, Fn(g, rng.standard_normal(5))) for _ in range(10_000)
    ]
    spread = abs(top - bottom)
    assert max(vals) <= top + 1e-10 * spread
    assert min(vals) >= bottom - 1e-10 * spread
    # the top eigenvector achieves the maximum exactly
    achieved = rayleigh(m_op, n_op, res.vectors[0])
    assert achieved == pytest.approx(top, rel=1e-10)


def test_rayleigh_rejects_zero_vector():
    g = Grid(0.0, 1.0, 3)
    m_op, n_op = random_pencil(g, 48)
    with pytest.raises(ValueError):
        rayleigh(m_op, n_op, Fn(g, [0.0, 0.0, 0.0]))


# ----------------------------------------------------------------------
# failure modes


def test_rejects_out_of_range_k():
    g = Grid(0.0, 1.0, 4)
    m_op, n_op = random_pencil(g, 50)
    with pytest.raises(ValueError):
        solve_pencil(m_op, n_op, k=0)
    with pytest.raises(ValueError):
        solve_pencil(m_op, n_op, k=5)


def test_rejects_asymmetric_inputs():
    g = Grid(0.0, 1.0, 3)
    skew = LinOp(g, np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]))
    _, n_op = random_pencil(g, 51)
    with pytest.raises(EigenSolverError):
        solve_pencil(skew, n_op, k=1)
    m_op, _ = random_pencil(g, 52)
    with pytest.raises(EigenSolverError):
        solve_pencil(m_op, skew, k=1)


def test_rejects_indefinite_n():
    g = Grid(0.0, 1.0, 3)
    m_op, _ = random_pencil(g, 53)
    bad = LinOp(g, np.diag([1.0, -1.0, 1.0]), symmetric=True)
    with pytest.raises(NotPositiveDefiniteError):
        solve_pencil(m_op, bad, k=1)
    singular = LinOp(g, np.diag([1.0, 1.0, 0.0]), symmetric=True)
    with pytest.raises(NotPositiveDefiniteError):
        solve_pencil(m_op, singular, k=1)


def test_rejects_grid_mismatch():
    m_op, _ = random_pencil(Grid(0.0, 1.0, 3), 54)
    _, n_op = random_pencil(Grid(0.0, 2.0, 3), 55)
    with pytest.raises(GridMismatchError):
        solve_pencil(m_op, n_op, k=1)


def test_result_arrays_are_frozen():
    g = Grid(0.0, 1.0, 3)
    m_op, n_op = random_pencil(g, 56)
    res = solve_pencil(m_op, n_op, k=2)
    with pytest.raises(ValueError):
        res.eigenvalues[0] = 0.0
