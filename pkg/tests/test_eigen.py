import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st
from scipy import sparse

from steklab.analytic import circle_laplace, disk_steklov, sphere_laplace, torus_laplace
from steklab.eigen import (
    dtn_matrix,
    harmonic_extension,
    laplace_spectrum,
    solve_generalized,
    steklov_spectrum,
)
from steklab.errors import DimensionMismatch, EmptyBoundaryError, HasBoundaryError
from steklab.fem import assemble_boundary_mass, assemble_stiffness
from steklab.shapes import ShapeSpec, generate_shape


def test_diagonal_pencil():
    A = sparse.diags([1.0, 2.0])
    res = solve_generalized(A, sparse.identity(2), 1)
    assert np.allclose(res.eigenvalues, [1, 2])


def test_path_graph_laplacian():
    A = sparse.csr_matrix([[1, -1, 0], [-1, 2, -1], [0, -1, 1]], dtype=float)
    res = solve_generalized(A, sparse.identity(3), 2)
    assert np.allclose(res.eigenvalues, [0, 1, 3], atol=1e-12)


def test_random_pencil_matches_dense(rng):
    X = rng.standard_normal((50, 50))
    A = X @ X.T
    Y = rng.standard_normal((50, 50))
    B = Y @ Y.T + 50 * np.eye(50)
    res = solve_generalized(sparse.csr_matrix(A), sparse.csr_matrix(B), 5)
    ref = sla.eigh(A, B, eigvals_only=True)[:6]
    assert np.allclose(res.eigenvalues, ref, rtol=1e-10)


def test_sparse_path_matches_dense(rng):
    n = 300
    main = 2 + rng.random(n)
    A = sparse.diags([main, -np.ones(n - 1), -np.ones(n - 1)], [0, 1, -1]).tocsr()
    B = sparse.diags(1 + rng.random(n)).tocsr()
    dense = solve_generalized(A, B, 4)
    lanczos = solve_generalized(A, B, 4, dense_limit=10)
    assert np.allclose(dense.eigenvalues, lanczos.eigenvalues, rtol=1e-8)


def test_singular_b_eliminated(disk):
    K = assemble_stiffness(disk)
    B = assemble_boundary_mass(disk)
    full = solve_generalized(K, B, 4)
    assert np.allclose(full.eigenvalues, steklov_spectrum(disk, 4).eigenvalues,
                       rtol=1e-9, atol=1e-10)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        solve_generalized(sparse.identity(3), sparse.identity(4), 1)
    with pytest.raises(DimensionMismatch):
        solve_generalized(sparse.identity(3), sparse.diags([1.0, 0, 0]), 2)


def test_dtn_annihilates_constants(annulus):
    K = assemble_stiffness(annulus)
    S = dtn_matrix(K, annulus.boundary_vertices).matrix
    assert np.abs(S @ np.ones(S.shape[0])).max() < 1e-9 * np.abs(S).max()
    assert np.allclose(S, S.T)


@given(seed=st.integers(0, 2 ** 32 - 1))
def test_dtn_energy_identity(seed, disk):
    # g S g equals the energy of the harmonic extension
    K = assemble_stiffness(disk)
    b = disk.boundary_vertices
    g = np.random.default_rng(seed).standard_normal(len(b))
    S = dtn_matrix(K, b).matrix
    u = harmonic_extension(K, b, g)
    assert g @ S @ g == pytest.approx(u @ K @ u, rel=1e-9)


def test_disk_spectrum_dense_vs_lanczos(disk):
    a = steklov_spectrum(disk, 6)
    b = steklov_spectrum(disk, 6, dense_limit=5)
    assert np.allclose(a.eigenvalues, b.eigenvalues, rtol=1e-7, atol=1e-9)
    assert np.allclose(a.eigenvalues, disk_steklov(7), rtol=0.02, atol=1e-9)


def test_disk_multiplicities(fine_disk):
    groups = steklov_spectrum(fine_disk, 4).multiplicities(rtol=1e-3)
    assert [m for _, m in groups] == [1, 2, 2]


def test_circle_laplace():
    m = generate_shape(ShapeSpec("circle", {"length": 2 * math.pi, "h": 0.02}))
    res = laplace_spectrum(m, 4)
    assert np.allclose(res.eigenvalues, circle_laplace(5, 2 * math.pi), rtol=1e-3, atol=1e-10)


def test_sphere_laplace():
    m = generate_shape(ShapeSpec("sphere", {"h": 0.1}))
    res = laplace_spectrum(m, 8)
    assert np.allclose(res.eigenvalues, sphere_laplace(9), rtol=0.02, atol=1e-9)


def test_torus_laplace(torus):
    res = laplace_spectrum(torus, 8)
    assert np.allclose(res.eigenvalues, torus_laplace(9, 2 * math.pi, 2 * math.pi),
                       rtol=0.05, atol=1e-9)


def test_laplace_rejects_boundary(disk):
    with pytest.raises(HasBoundaryError):
        laplace_spectrum(disk, 2)


def test_steklov_needs_boundary(torus):
    with pytest.raises(EmptyBoundaryError):
        steklov_spectrum(torus, 2)


def test_spectral_result_json(disk):
    d = steklov_spectrum(disk, 3).to_dict()
    assert d["kind"] == "steklov" and len(d["eigenvalues"]) == 4
    assert d["mesh_fingerprint"] == disk.fingerprint()
