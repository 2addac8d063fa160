"""Simplicial manifolds with boundary: storage, validation, measures and OFF I/O."""

import hashlib
import math
from functools import cached_property
from itertools import combinations
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .errors import (
    DegenerateSimplex,
    EmptyBoundaryError,
    InvalidParameter,
    NonManifoldError,
    ParseError,
)

__all__ = [
    "SimplicialMesh",
    "simplex_volumes",
    "load_mesh",
    "save_mesh",
    "mesh_measures",
]

# relative threshold under which a simplex counts as degenerate
_DEGENERATE_RTOL = 1e-12


def simplex_volumes(vertices, simplices):
    """Unsigned m-volumes of m-simplices embedded in R^d (any m <= d).

    Uses the Gram determinant of the edge vectors, so the embedding
    dimension may exceed the simplex dimension (surfaces in R^3,
    flat tori in R^4, ...).
    """
    simplices = np.asarray(simplices, dtype=np.int64)
    if simplices.size == 0:
        return np.zeros(0)
    m = simplices.shape[1] - 1
    if m == 0:
        return np.ones(simplices.shape[0])
    p = vertices[simplices]  # (S, m+1, d)
    E = p[:, 1:, :] - p[:, :1, :]  # (S, m, d)
    if m == 1:
        return np.linalg.norm(E[:, 0, :], axis=1)
    G = np.einsum("sid,sjd->sij", E, E)
    det = np.linalg.det(G)
    return np.sqrt(np.clip(det, 0.0, None)) / math.factorial(m)


def _faces_of(simplices):
    """All codimension-one faces, sorted per row, one block per omitted vertex."""
    m1 = simplices.shape[1]
    blocks = [np.delete(simplices, i, axis=1) for i in range(m1)]
    return np.sort(np.concatenate(blocks, axis=0), axis=1)


class SimplicialMesh:
    """A compact simplicial manifold, possibly with boundary.

    Parameters
    ----------
    vertices : array_like, shape (V, d)
        Embedding coordinates. ``d`` may exceed the manifold dimension.
    cells : array_like, shape (C, m+1)
        Top-dimensional simplices as vertex index tuples.
    validate : bool
        Reject degenerate cells and unreferenced vertices.

    Notes
    -----
    Boundary faces are the codimension-one faces belonging to exactly one
    cell. They are grouped into connected components through shared
    codimension-two faces, and components are labelled in order of their
    smallest vertex index so that labels are stable under re-generation.
    Arrays are made read-only; a mesh never changes after construction.
    """

    def __init__(self, vertices, cells, validate=True):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] == 0:
            raise InvalidParameter("vertices must be a non-empty (V, d) array")
        if v.shape[1] < 2:
            v = np.column_stack([v, np.zeros((v.shape[0], 2 - v.shape[1]))])
        c = np.array(cells, dtype=np.int64)
        if c.ndim != 2 or c.shape[0] == 0:
            raise InvalidParameter("cells must be a non-empty (C, m+1) array")
        if c.min() < 0 or c.max() >= v.shape[0]:
            raise InvalidParameter("cell index out of range")
        self.dim = c.shape[1] - 1
        if not 1 <= self.dim <= v.shape[1]:
            raise InvalidParameter(
                f"cannot embed {self.dim}-simplices in R^{v.shape[1]}")
        self.vertices = v
        self.cells = c
        self._build_boundary()
        if validate:
            self._validate()
        for arr in (self.vertices, self.cells, self.boundary_faces,
                    self.boundary_labels):
            arr.setflags(write=False)

    # ------------------------------------------------------------------
    def _build_boundary(self):
        faces = _faces_of(self.cells)
        uniq, inverse, counts = np.unique(
            faces, axis=0, return_inverse=True, return_counts=True)
        if np.any(counts > 2):
            bad = uniq[np.argmax(counts > 2)]
            raise NonManifoldError(
                f"face {tuple(bad)} is shared by {counts.max()} cells")
        self.boundary_faces = uniq[counts == 1]
        nf = len(self.boundary_faces)
        if nf == 0:
            self.boundary_labels = np.zeros(0, dtype=np.int64)
            self.n_components = 0
            return
        if self.dim == 1:
            # boundary points of a path; each point is its own component
            raw = np.arange(nf)
        else:
            sub = _faces_of(self.boundary_faces)
            su, sinv = np.unique(sub, axis=0, return_inverse=True)
            sinv = np.asarray(sinv).ravel()
            owner = np.tile(np.arange(nf), self.dim)
            inc = sparse.csr_matrix(
                (np.ones(len(owner)), (owner, sinv)), shape=(nf, len(su)))
            _, raw = connected_components(inc @ inc.T, directed=False)
        # relabel by smallest vertex index in each component
        keys = {}
        for lab in np.unique(raw):
            keys[lab] = self.boundary_faces[raw == lab].min()
        order = sorted(keys, key=keys.get)
        remap = {old: new for new, old in enumerate(order)}
        self.boundary_labels = np.array([remap[x] for x in raw], dtype=np.int64)
        self.n_components = len(order)

    def _validate(self):
        vols = self.cell_volumes
        scale = self.mean_edge_length ** self.dim
        bad = np.flatnonzero(vols <= _DEGENERATE_RTOL * scale)
        if bad.size:
            raise DegenerateSimplex(
                f"{bad.size} degenerate cell(s), first is #{bad[0]}")
        used = np.zeros(len(self.vertices), dtype=bool)
        used[self.cells.ravel()] = True
        if not used.all():
            raise InvalidParameter(
                f"{(~used).sum()} vertices are not referenced by any cell")

    # ------------------------------------------------------------------
    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def boundary_dim(self):
        """Dimension n of the boundary (the manifold has dimension n+1)."""
        return self.dim - 1

    @property
    def has_boundary(self):
        return self.n_components > 0

    @cached_property
    def edges(self):
        pairs = [self.cells[:, [i, j]]
                 for i, j in combinations(range(self.dim + 1), 2)]
        e = np.sort(np.concatenate(pairs, axis=0), axis=1)
        e = np.unique(e, axis=0)
        e.setflags(write=False)
        return e

    @cached_property
    def edge_lengths(self):
        e = self.edges
        out = np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]],
                             axis=1)
        out.setflags(write=False)
        return out

    @cached_property
    def mean_edge_length(self):
        return float(self.edge_lengths.mean())

    @cached_property
    def cell_volumes(self):
        out = simplex_volumes(self.vertices, self.cells)
        out.setflags(write=False)
        return out

    @cached_property
    def face_volumes(self):
        out = simplex_volumes(self.vertices, self.boundary_faces)
        out.setflags(write=False)
        return out

    @cached_property
    def volume(self):
        return float(self.cell_volumes.sum())

    @cached_property
    def boundary_volumes(self):
        """Measure of each boundary component, indexed by label."""
        return [float(self.face_volumes[self.boundary_labels == j].sum())
                for j in range(self.n_components)]

    @cached_property
    def boundary_vertices(self):
        return np.unique(self.boundary_faces)

    def component_vertices(self, label):
        from .errors import ComponentNotFound

        if not 0 <= label < self.n_components:
            raise ComponentNotFound(f"no boundary component {label}")
        return np.unique(self.boundary_faces[self.boundary_labels == label])

    def component_faces(self, label):
        from .errors import ComponentNotFound

        if not 0 <= label < self.n_components:
            raise ComponentNotFound(f"no boundary component {label}")
        return self.boundary_faces[self.boundary_labels == label]

    def boundary_submesh(self, label):
        """Boundary component ``label`` as a closed mesh of dimension n.

        Returns the submesh and the map from its vertices to ours.
        """
        faces = self.component_faces(label)
        if self.dim < 2:
            raise InvalidParameter("boundary of a 1-manifold is a point set")
        keep = np.unique(faces)
        local = np.searchsorted(keep, faces)
        return SimplicialMesh(self.vertices[keep], local), keep

    # ------------------------------------------------------------------
    def transformed(self, matrix=None, shift=None, scale=1.0):
        """Copy with coordinates mapped by ``scale * x @ matrix.T + shift``."""
        v = self.vertices
        if matrix is not None:
            v = v @ np.asarray(matrix, dtype=float).T
        v = scale * v
        if shift is not None:
            v = v + np.asarray(shift, dtype=float)
        return SimplicialMesh(v, self.cells)

    def scaled(self, t):
        return self.transformed(scale=t)

    def fingerprint(self):
        """Short SHA-256 digest of the vertex and cell arrays."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.vertices).tobytes())
        h.update(np.ascontiguousarray(self.cells).tobytes())
        return h.hexdigest()[:16]

    def require_boundary(self):
        if not self.has_boundary:
            raise EmptyBoundaryError("mesh has no boundary")
        return self

    def __repr__(self):
        return (f"SimplicialMesh(dim={self.dim}, V={self.n_vertices}, "
                f"C={len(self.cells)}, b={self.n_components})")


def mesh_measures(mesh):
    """Return ``(|M|, [|Sigma_0|, |Sigma_1|, ...])``."""
    return mesh.volume, list(mesh.boundary_volumes)


# ----------------------------------------------------------------------
# OFF input / output
# ----------------------------------------------------------------------
def _tokens(lines):
    for line in lines:
        body = line.split("#", 1)[0].split()
        yield from body


def load_mesh(path, format="OFF", require_boundary=False):
    """Read an OFF file (triangles or polylines) or extended OFF with tets.

    Extended files carry a trailing ``#TETS <count>`` marker followed by
    ``4 a b c d`` lines; when present, the tetrahedra are the cells and the
    face block is ignored (boundary is recomputed).
    """
    if format.upper() != "OFF":
        raise ParseError(f"unsupported mesh format {format!r}")
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()

    tet_lines = []
    for i, line in enumerate(lines):
        if line.strip().upper().startswith("#TETS"):
            tet_lines = lines[i + 1:]
            lines = lines[:i]
            break

    try:
        tok = list(_tokens(lines))
        if not tok:
            raise ParseError("empty file")
        head = tok.pop(0)
        if head == "OFF":
            dim = 3
        elif head == "nOFF":
            dim = int(tok.pop(0))
        else:
            raise ParseError(f"bad OFF header {head!r}")
        nv, nf, _ = (int(tok.pop(0)) for _ in range(3))
        verts = np.array([float(tok.pop(0)) for _ in range(nv * dim)])
        verts = verts.reshape(nv, dim)
        faces = []
        for _ in range(nf):
            k = int(tok.pop(0))
            faces.append([int(tok.pop(0)) for _ in range(k)])
        if tok:
            raise ParseError(f"{len(tok)} trailing tokens after face block")
        if tet_lines:
            tt = list(_tokens(tet_lines))
            cells = []
            while tt:
                k = int(tt.pop(0))
                if k != 4:
                    raise ParseError("tetrahedron lines must start with 4")
                cells.append([int(tt.pop(0)) for _ in range(4)])
        else:
            cells = faces
    except ParseError:
        raise
    except (ValueError, IndexError) as exc:
        raise ParseError(f"malformed OFF file {path}: {exc}") from exc

    sizes = {len(c) for c in cells}
    if len(sizes) != 1 or sizes.pop() not in (2, 3, 4):
        raise ParseError("cells must all be segments, triangles, or tetrahedra")
    try:
        mesh = SimplicialMesh(verts, cells)
    except InvalidParameter as exc:
        raise ParseError(str(exc)) from exc
    if require_boundary:
        mesh.require_boundary()
    return mesh


def save_mesh(mesh, path):
    """Write ``mesh`` as OFF (nOFF if the embedding is not 3-dimensional)."""
    v = mesh.vertices
    d = v.shape[1]
    if mesh.dim == 3:
        faces = mesh.boundary_faces
    else:
        faces = mesh.cells
    out = []
    if d == 3:
        out.append("OFF")
    else:
        out.append("nOFF")
        out.append(str(d))
    out.append(f"{len(v)} {len(faces)} 0")
    out.extend(" ".join(repr(float(x)) for x in row) for row in v)
    out.extend(f"{len(f)} " + " ".join(str(int(i)) for i in f) for f in faces)
    if mesh.dim == 3:
        out.append(f"#TETS {len(mesh.cells)}")
        out.extend("4 " + " ".join(str(int(i)) for i in c) for c in mesh.cells)
    Path(path).write_text("\n".join(out) + "\n")
