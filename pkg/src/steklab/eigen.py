"""Generalized symmetric eigenproblems: Laplace spectra and discrete DtN spectra."""

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy import sparse
from scipy.sparse import linalg as spla
from scipy.sparse.csgraph import connected_components

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    EmptyBoundaryError,
    HasBoundaryError,
    SingularInteriorBlock,
)
from .fem import assemble_boundary_mass, assemble_mass, assemble_stiffness

__all__ = [
    "SpectralResult",
    "DtNMatrix",
    "solve_generalized",
    "dtn_matrix",
    "harmonic_extension",
    "steklov_spectrum",
    "laplace_spectrum",
]

DENSE_LIMIT = 2000
DEFAULT_TOL = 1e-8
MULTIPLICITY_RTOL = 1e-6


@dataclass
class SpectralResult:
    """Ascending eigenvalues with eigenvectors and residual norms.

    For Steklov spectra the eigenvectors live on ``support`` (the
    boundary vertices); :func:`harmonic_extension` lifts them to the mesh.
    """

    kind: str
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # (n, k+1), columns B-orthonormal
    residuals: np.ndarray
    k_requested: int
    support: np.ndarray = None
    fingerprint: str = ""
    meta: dict = field(default_factory=dict)

    def __getitem__(self, j):
        return float(self.eigenvalues[j])

    def multiplicities(self, rtol=MULTIPLICITY_RTOL):
        """Cluster eigenvalues whose relative gap is below ``rtol``."""
        groups = []
        scale = max(abs(self.eigenvalues).max(), 1e-300)
        for lam in self.eigenvalues:
            if groups and abs(lam - groups[-1][0]) <= rtol * max(abs(lam), scale * rtol):
                groups[-1][1] += 1
            else:
                groups.append([float(lam), 1])
        return [tuple(g) for g in groups]

    def to_dict(self):
        return {
            "kind": self.kind,
            "k_requested": self.k_requested,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "residuals": [float(x) for x in self.residuals],
            "mesh_fingerprint": self.fingerprint,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


@dataclass
class DtNMatrix:
    """Dense Schur complement of the stiffness matrix onto boundary vertices."""

    matrix: np.ndarray
    boundary_index: np.ndarray

    @property
    def dimension(self):
        return self.matrix.shape[0]


def _dense(A):
    return A.toarray() if sparse.issparse(A) else np.asarray(A, dtype=float)


def _residuals(A, B, vals, vecs):
    R = A @ vecs - (B @ vecs) * vals[None, :]
    return np.linalg.norm(R, axis=0) / np.linalg.norm(vecs, axis=0)


def _b_zero_rows(B):
    Bd = abs(sparse.csr_matrix(B)) if sparse.issparse(B) else sparse.csr_matrix(abs(np.asarray(B)))
    rowsum = np.asarray(Bd.sum(axis=1)).ravel()
    return np.flatnonzero(rowsum == 0), np.flatnonzero(rowsum != 0)


def solve_generalized(A, B, k, tol=DEFAULT_TOL, dense_limit=DENSE_LIMIT, rng=None):
    """The ``k+1`` smallest eigenpairs of ``A v = theta B v``.

    ``B`` may be singular; rows where ``B`` vanishes identically are
    eliminated by a Schur complement first, so the pencil is solved on its
    B-nondegenerate subspace. Problems up to ``dense_limit`` unknowns use a
    dense symmetric solver, larger ones shift-invert Lanczos on the sparse
    pencil.

    Returns
    -------
    SpectralResult
        Eigenvectors span the full index range of ``A``.
    """
    n = A.shape[0]
    if A.shape != (n, n) or B.shape != (n, n):
        raise DimensionMismatch(f"pencil shapes {A.shape} and {B.shape}")
    if k < 1:
        raise ValueError("k must be at least 1")
    nev = k + 1
    zero, live = _b_zero_rows(B)
    if nev > len(live):
        raise DimensionMismatch(
            f"asked for {nev} eigenpairs of a pencil with rank {len(live)}")

    if len(live) <= dense_limit:
        if len(zero):
            Ad = sparse.csr_matrix(A)
            S = dtn_matrix(Ad, live).matrix
            Bl = _dense(sparse.csr_matrix(B)[live][:, live])
            vals, small = sla.eigh(S, Bl, subset_by_index=[0, nev - 1])
            vecs = np.zeros((n, nev))
            vecs[live] = small
            vecs[zero] = _extend(Ad, live, zero, small)
        else:
            vals, vecs = sla.eigh(_dense(A), _dense(B), subset_by_index=[0, nev - 1])
    else:
        vals, vecs = _shift_invert(A, B, nev, tol, rng)
    res = _residuals(sparse.csr_matrix(A), sparse.csr_matrix(B), vals, vecs)
    if np.any(res > tol * max(1.0, abs(vals).max())):
        raise ConvergenceFailure(f"residual {res.max():.2e} above tolerance {tol}")
    return SpectralResult("generalized", vals, vecs, res, k)


def _shift_invert(A, B, nev, tol, rng):
    A = sparse.csc_matrix(A)
    B = sparse.csc_matrix(B)
    scale = A.diagonal().sum() / max(B.diagonal().sum(), 1e-300)
    sigma = -1e-3 * scale / A.shape[0] ** 0.5
    rng = np.random.default_rng(0) if rng is None else rng
    v0 = rng.standard_normal(A.shape[0])
    try:
        vals, vecs = spla.eigsh(A, k=nev, M=B, sigma=sigma, which="LM",
                                v0=v0, tol=tol * 1e-2, maxiter=50 * A.shape[0])
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceFailure(str(exc)) from exc
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    norms = np.sqrt(np.einsum("ij,ij->j", vecs, B @ vecs))
    return vals, vecs / norms


def _interior_factor(K, interior):
    Kii = sparse.csc_matrix(K[interior][:, interior])
    if Kii.shape[0] == 0:
        return None
    ncomp, labels = connected_components(Kii, directed=False)
    # an interior island with no coupling to the boundary makes Kii singular
    coupled = np.asarray(abs(K[interior]).sum(axis=1)).ravel() - np.asarray(abs(Kii).sum(axis=1)).ravel()
    for c in range(ncomp):
        if not np.any(coupled[labels == c] > 0):
            raise SingularInteriorBlock("interior component not coupled to the boundary")
    shift = 1e-12 * Kii.diagonal().sum() / Kii.shape[0]
    try:
        return spla.splu(Kii + shift * sparse.identity(Kii.shape[0], format="csc"))
    except RuntimeError as exc:
        raise SingularInteriorBlock(str(exc)) from exc


def _extend(K, boundary, interior, g):
    lu = _interior_factor(K, interior)
    if lu is None:
        return np.zeros((0,) + np.shape(g)[1:])
    rhs = -(K[interior][:, boundary] @ g)
    return lu.solve(np.asarray(rhs))


def dtn_matrix(K, boundary_index):
    """Schur complement ``K_bb - K_bi K_ii^{-1} K_ib`` as a dense matrix.

    The interior block is factorized once (sparse LU with a diagonal shift
    of ``1e-12 * trace / dim`` as a guard against near-degenerate
    elements). Constant boundary data is mapped to zero.
    """
    K = sparse.csr_matrix(K)
    n = K.shape[0]
    boundary_index = np.asarray(boundary_index, dtype=np.int64)
    interior = np.setdiff1d(np.arange(n), boundary_index)
    Kbb = _dense(K[boundary_index][:, boundary_index])
    if len(interior) == 0:
        return DtNMatrix(Kbb, boundary_index)
    lu = _interior_factor(K, interior)
    Kib = K[interior][:, boundary_index]
    X = lu.solve(Kib.toarray())
    S = Kbb - Kib.T @ X
    S = 0.5 * (S + S.T)
    return DtNMatrix(S, boundary_index)


def harmonic_extension(K, boundary_index, g):
    """Extend boundary values ``g`` (one column per function) harmonically."""
    K = sparse.csr_matrix(K)
    n = K.shape[0]
    boundary_index = np.asarray(boundary_index)
    g = np.asarray(g, dtype=float)
    interior = np.setdiff1d(np.arange(n), boundary_index)
    out = np.zeros((n,) + g.shape[1:])
    out[boundary_index] = g
    if len(interior):
        out[interior] = _extend(K, boundary_index, interior, g)
    return out


def steklov_spectrum(mesh, k, tol=DEFAULT_TOL, lumped=True, K=None,
                     dense_limit=DENSE_LIMIT, rng=None):
    """Discrete Steklov eigenvalues ``sigma_0 <= ... <= sigma_k`` of ``mesh``.

    Dense path: eigenpairs of ``S v = sigma B_bb v`` with ``S`` the DtN
    matrix. Boundaries larger than ``dense_limit`` vertices fall back to
    shift-invert Lanczos on the full pencil ``(K, B)``.
    """
    if not mesh.has_boundary:
        raise EmptyBoundaryError("Steklov problem needs a boundary")
    K = assemble_stiffness(mesh) if K is None else K
    B = assemble_boundary_mass(mesh, lumped=lumped)
    bidx = mesh.boundary_vertices
    nev = k + 1
    if nev > len(bidx):
        raise DimensionMismatch(f"only {len(bidx)} boundary vertices")
    if len(bidx) <= dense_limit:
        S = dtn_matrix(K, bidx).matrix
        Bbb = _dense(B[bidx][:, bidx])
        vals, vecs = sla.eigh(S, Bbb, subset_by_index=[0, nev - 1])
        res = _residuals(S, Bbb, vals, vecs)
    else:
        vals, full = _shift_invert(K, B, nev, tol, rng)
        vecs = full[bidx]
        res = _residuals(sparse.csr_matrix(K), sparse.csr_matrix(B), vals, full)
    if np.any(res > tol * max(1.0, abs(vals).max())):
        raise ConvergenceFailure(f"residual {res.max():.2e} above tolerance {tol}")
    return SpectralResult("steklov", vals, vecs, res, k, support=bidx,
                          fingerprint=mesh.fingerprint())


def laplace_spectrum(mesh, k, tol=DEFAULT_TOL, lumped=True,
                     dense_limit=DENSE_LIMIT, rng=None):
    """Laplace-Beltrami eigenvalues of a closed mesh (``K v = lambda M v``)."""
    if mesh.has_boundary:
        raise HasBoundaryError("Laplace spectrum is computed on closed meshes only")
    K = assemble_stiffness(mesh)
    M = assemble_mass(mesh, lumped=lumped)
    out = solve_generalized(K, M, k, tol=tol, dense_limit=dense_limit, rng=rng)
    out.kind = "laplace"
    out.support = np.arange(mesh.n_vertices)
    out.fingerprint = mesh.fingerprint()
    return out
