"""Piecewise-linear finite element matrices and Rayleigh-Steklov quotients.

All matrices are ``scipy.sparse.csr_matrix`` of size ``V x V`` where ``V``
is the vertex count of the mesh.
"""

import math

import numpy as np
from scipy import sparse

from .errors import DegenerateSimplex, EmptyBoundaryError, ZeroBoundaryNorm

__all__ = [
    "assemble_stiffness",
    "assemble_mass",
    "assemble_boundary_mass",
    "lumped_boundary_weights",
    "rayleigh_quotient",
    "export_coo",
]


def _local_gradients(points):
    """Volumes and barycentric-gradient Gram matrices of a batch of simplices.

    ``points`` has shape (S, m+1, d). Returns ``vol`` (S,) and ``G`` (S,
    m+1, m+1) with ``G[s, i, j] = grad(phi_i) . grad(phi_j)`` on simplex s.
    """
    E = points[:, 1:, :] - points[:, :1, :]
    gram = np.einsum("sid,sjd->sij", E, E)
    det = np.linalg.det(gram)
    if np.any(det <= 0):
        raise DegenerateSimplex(
            f"{int((det <= 0).sum())} zero-volume simplices in assembly")
    m = E.shape[1]
    vol = np.sqrt(det) / math.factorial(m)
    ginv = np.linalg.inv(gram)
    D = np.vstack([-np.ones((1, m)), np.eye(m)])  # (m+1, m)
    G = np.einsum("im,smn,jn->sij", D, ginv, D)
    return vol, G


def _cotangent_local(points):
    """Cotangent-formula local stiffness for triangles embedded in R^d."""
    loc = np.zeros((points.shape[0], 3, 3))
    area2 = None
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        u = points[:, j] - points[:, i]
        w = points[:, k] - points[:, i]
        dot = np.einsum("sd,sd->s", u, w)
        cross2 = np.einsum("sd,sd->s", u, u) * np.einsum("sd,sd->s", w, w) - dot ** 2
        if area2 is None:
            area2 = np.sqrt(np.clip(cross2, 0.0, None))
            if np.any(area2 <= 0):
                raise DegenerateSimplex(
                    f"{int((area2 <= 0).sum())} zero-area triangles in assembly")
        half_cot = 0.5 * dot / area2
        loc[:, j, k] -= half_cot
        loc[:, k, j] -= half_cot
        loc[:, j, j] += half_cot
        loc[:, k, k] += half_cot
    return loc


def _scatter(simplices, local, n):
    m1 = simplices.shape[1]
    rows = np.repeat(simplices, m1, axis=1).ravel()
    cols = np.tile(simplices, (1, m1)).ravel()
    A = sparse.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    A.sum_duplicates()
    return A


def assemble_stiffness(mesh, method="auto"):
    """Dirichlet-energy matrix K with ``u @ K @ u = integral of |grad u|^2``.

    ``method`` is ``"cotangent"`` (triangles only), ``"gradient"`` (any
    dimension), or ``"auto"`` which picks the cotangent formula in 2D.
    """
    pts = mesh.vertices[mesh.cells]
    if method == "auto":
        method = "cotangent" if mesh.dim == 2 else "gradient"
    if method == "cotangent":
        if mesh.dim != 2:
            raise ValueError("cotangent assembly needs a triangle mesh")
        local = _cotangent_local(pts)
    else:
        vol, G = _local_gradients(pts)
        local = vol[:, None, None] * G
    K = _scatter(mesh.cells, local, mesh.n_vertices)
    # exact symmetry; assembly roundoff is below 1 ulp per entry
    return ((K + K.T) * 0.5).tocsr()


def _mass_local(simplices, vertices, lumped):
    m1 = simplices.shape[1]
    if m1 == 1:
        local = np.ones((len(simplices), 1, 1))
        return local
    from .mesh import simplex_volumes

    vol = simplex_volumes(vertices, simplices)
    if np.any(vol <= 0):
        raise DegenerateSimplex("zero-volume simplex in mass assembly")
    if lumped:
        local = np.zeros((len(simplices), m1, m1))
        idx = np.arange(m1)
        local[:, idx, idx] = (vol / m1)[:, None]
    else:
        pattern = (np.ones((m1, m1)) + np.eye(m1)) / (m1 * (m1 + 1))
        local = vol[:, None, None] * pattern[None]
    return local


def assemble_mass(mesh, lumped=True):
    """Volume mass matrix M (``1 @ M @ 1 == |M|``)."""
    local = _mass_local(mesh.cells, mesh.vertices, lumped)
    return _scatter(mesh.cells, local, mesh.n_vertices)


def assemble_boundary_mass(mesh, components=None, lumped=True):
    """Boundary mass matrix B (``1 @ B @ 1 == |Sigma|``).

    Parameters
    ----------
    components : iterable of int, optional
        Restrict to these boundary component labels.
    lumped : bool
        Diagonal (row-sum) mass by default; consistent mass otherwise.
    """
    faces = mesh.boundary_faces
    if components is not None:
        keep = np.isin(mesh.boundary_labels, list(components))
        faces = faces[keep]
    if len(faces) == 0:
        raise EmptyBoundaryError("no boundary faces selected")
    local = _mass_local(faces, mesh.vertices, lumped)
    return _scatter(faces, local, mesh.n_vertices)


def lumped_boundary_weights(mesh, components=None):
    """Per-vertex lumped boundary measure (zero at interior vertices)."""
    return np.asarray(
        assemble_boundary_mass(mesh, components, lumped=True).diagonal())


def rayleigh_quotient(K, B, u, atol=0.0):
    """``u K u / u B u``; raises ZeroBoundaryNorm when the denominator vanishes."""
    u = np.asarray(u, dtype=float)
    den = float(u @ (B @ u))
    if den <= atol:
        raise ZeroBoundaryNorm("function vanishes on the boundary")
    return max(float(u @ (K @ u)), 0.0) / den


def export_coo(A, path):
    """Write the upper triangle of a symmetric matrix as ``row col value`` lines."""
    C = sparse.triu(sparse.coo_matrix(A)).tocoo()
    order = np.lexsort((C.col, C.row))
    with open(path, "w") as fh:
        fh.write(f"# {A.shape[0]} {A.shape[1]} symmetric\n")
        for r, c, v in zip(C.row[order], C.col[order], C.data[order]):
            fh.write(f"{int(r)} {int(c)} {float(v)!r}\n")
