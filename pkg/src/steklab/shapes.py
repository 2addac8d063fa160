"""Deterministic generators for the test-shape corpus.

Planar and spherical shapes are built from concentric rings of vertices
stitched together ("zippered") strip by strip; product shapes (cylinders,
flat tori) are built from regular polygons whose perimeters equal the
requested lengths exactly, so their intrinsic geometry is exactly flat.
Target edge length ``h`` bounds every generated edge.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter
from .mesh import SimplicialMesh, load_mesh

__all__ = [
    "ShapeSpec",
    "generate_shape",
    "SHAPE_KINDS",
    "regular_polygon",
    "extrude",
]

SQRT2 = math.sqrt(2.0)

_DEFAULTS = {
    "disk": {"radius": 1.0, "h": 0.1},
    "annulus": {"r_in": 0.5, "r_out": 1.0, "h": 0.1},
    "flat_cylinder": {"L": 0.1, "circumference": 2 * math.pi, "h": 0.05},
    "sphere_minus_caps": {"cap_angle": 0.2, "radius": 1.0, "h": 0.15},
    "rectangle": {"width": 2.0, "height": 1.0, "h": 0.1},
    "product_torus": {"L1": 2 * math.pi, "L2": 2 * math.pi, "h": 0.5,
                      "thickness": 0.25},
    "circle": {"length": 2 * math.pi, "h": 0.05},
    "sphere": {"radius": 1.0, "h": 0.15},
    "custom_file": {},
}

SHAPE_KINDS = tuple(_DEFAULTS)

# shapes used by the inequality suite
GENERATOR_SHAPES = ("disk", "annulus", "flat_cylinder", "sphere_minus_caps",
                    "rectangle", "product_torus")


@dataclass(frozen=True)
class ShapeSpec:
    kind: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0

    def resolved(self):
        """Parameters with defaults filled in."""
        if self.kind not in _DEFAULTS:
            raise InvalidParameter(f"unknown shape kind {self.kind!r}")
        params = dict(_DEFAULTS[self.kind])
        params.update(self.parameters)
        return params

    def label(self):
        return self.parameters.get("name", self.kind)


def _positive(params, *names):
    for name in names:
        val = params.get(name)
        if not isinstance(val, (int, float)) or not math.isfinite(val) or val <= 0:
            raise InvalidParameter(f"{name} must be a positive number, got {val!r}")


def _validate(kind, p):
    if kind == "custom_file":
        if "path" not in p:
            raise InvalidParameter("custom_file needs a 'path' parameter")
        return
    _positive(p, "h")
    if kind == "disk":
        _positive(p, "radius")
    elif kind == "annulus":
        _positive(p, "r_in", "r_out")
        if not p["r_in"] < p["r_out"]:
            raise InvalidParameter("annulus needs 0 < r_in < r_out")
    elif kind == "flat_cylinder":
        _positive(p, "L", "circumference")
    elif kind == "sphere_minus_caps":
        _positive(p, "cap_angle", "radius")
        if not p["cap_angle"] < math.pi / 2:
            raise InvalidParameter("cap_angle must be below pi/2")
    elif kind == "rectangle":
        _positive(p, "width", "height")
    elif kind == "product_torus":
        _positive(p, "L1", "L2")
        if p.get("thickness", 0) < 0:
            raise InvalidParameter("thickness must be nonnegative")
    elif kind == "circle":
        _positive(p, "length")
    elif kind == "sphere":
        _positive(p, "radius")
    if p["h"] > 0.5 * _size_scale(kind, p):
        raise InvalidParameter("h is too large for this shape")


def _size_scale(kind, p):
    return {
        "disk": lambda: p["radius"],
        "annulus": lambda: p["r_out"] - p["r_in"],
        "flat_cylinder": lambda: p["circumference"] / 3,
        "sphere_minus_caps": lambda: p["radius"],
        "rectangle": lambda: min(p["width"], p["height"]),
        "product_torus": lambda: min(p["L1"], p["L2"]) / 3,
        "circle": lambda: p["length"] / 3,
        "sphere": lambda: p["radius"],
    }[kind]()


# ----------------------------------------------------------------------
# building blocks
# ----------------------------------------------------------------------
def _zipper(a_idx, a_ang, b_idx, b_ang):
    """Triangulate the strip between two closed rings of vertices.

    Angles must be increasing within each ring and start within one
    spacing of each other.
    """
    p, q = len(a_idx), len(b_idx)
    A = list(a_idx) + [a_idx[0]]
    B = list(b_idx) + [b_idx[0]]
    aa = list(a_ang) + [a_ang[0] + 2 * math.pi]
    bb = list(b_ang) + [b_ang[0] + 2 * math.pi]
    tris = []
    i = j = 0
    while i < p or j < q:
        if j == q or (i < p and aa[i + 1] <= bb[j + 1]):
            tris.append((A[i], A[i + 1], B[j]))
            i += 1
        else:
            tris.append((A[i], B[j + 1], B[j]))
            j += 1
    return tris


def _ring_counts(radii, ds):
    """Vertices per ring so that neighbouring-ring zipper edges stay short."""
    radii = np.asarray(radii, dtype=float)
    padded = np.concatenate([[0.0], radii, [0.0]])
    counts = []
    for i in range(len(radii)):
        r = max(padded[i], padded[i + 1], padded[i + 2])
        counts.append(max(6, int(math.ceil(2 * math.pi * r / ds))))
    return counts


def _ring_mesh(profile, ds, closed_start=False, closed_end=False):
    """Surface of revolution from a profile of (radius, height) rings.

    ``closed_start``/``closed_end`` put a pole vertex (radius zero) at the
    corresponding end of the profile instead of a boundary ring.
    """
    radii = [r for r, _ in profile]
    counts = _ring_counts(radii, ds)
    verts, rings = [], []
    if closed_start:
        verts.append((0.0, 0.0, profile[0][1]))
    for i, ((r, z), n) in enumerate(zip(profile, counts)):
        if (closed_start and i == 0) or (closed_end and i == len(profile) - 1):
            rings.append(None)
            continue
        off = 0.5 * (i % 2) * 2 * math.pi / n
        ang = off + 2 * math.pi * np.arange(n) / n
        start = len(verts)
        verts.extend((r * math.cos(t), r * math.sin(t), z) for t in ang)
        rings.append((list(range(start, start + n)), list(ang)))
    if closed_end:
        verts.append((0.0, 0.0, profile[-1][1]))
    tris = []
    live = [x for x in rings if x is not None]
    if closed_start:
        idx, _ = live[0]
        tris.extend((0, idx[k], idx[(k + 1) % len(idx)]) for k in range(len(idx)))
    for (ia, aa), (ib, bb) in zip(live[:-1], live[1:]):
        tris.extend(_zipper(ia, aa, ib, bb))
    if closed_end:
        pole = len(verts) - 1
        idx, _ = live[-1]
        tris.extend((pole, idx[(k + 1) % len(idx)], idx[k]) for k in range(len(idx)))
    return np.array(verts), np.array(tris)


def regular_polygon(n, perimeter):
    """Vertices of a regular n-gon in the plane with the given perimeter."""
    R = (perimeter / n) / (2 * math.sin(math.pi / n))
    t = 2 * math.pi * np.arange(n) / n
    return np.column_stack([R * np.cos(t), R * np.sin(t)])


def extrude(mesh, length, layers):
    """Cylinder ``[0, length] x mesh`` over a closed segment or triangle mesh.

    Prisms are split by the global vertex order, which makes the
    subdivision conforming across shared faces.
    """
    V = mesh.n_vertices
    z = np.linspace(0.0, length, layers + 1)
    verts = np.concatenate(
        [np.column_stack([mesh.vertices, np.full(V, zl)]) for zl in z])
    cells = []
    sorted_cells = np.sort(mesh.cells, axis=1)
    for layer in range(layers):
        lo, hi = layer * V, (layer + 1) * V
        if mesh.dim == 1:
            a, b = sorted_cells.T
            cells.append(np.column_stack([a + lo, b + lo, b + hi]))
            cells.append(np.column_stack([a + lo, a + hi, b + hi]))
        elif mesh.dim == 2:
            a, b, c = sorted_cells.T
            cells.append(np.column_stack([a + lo, b + lo, c + lo, c + hi]))
            cells.append(np.column_stack([a + lo, b + lo, b + hi, c + hi]))
            cells.append(np.column_stack([a + lo, a + hi, b + hi, c + hi]))
        else:
            raise InvalidParameter("can only extrude curves and surfaces")
    return SimplicialMesh(verts, np.concatenate(cells))


def _circle(length, n):
    pts = regular_polygon(n, length)
    segs = np.column_stack([np.arange(n), (np.arange(n) + 1) % n])
    return SimplicialMesh(pts, segs)


def _grid_triangles(nx, ny, periodic_x, periodic_y):
    """Split an nx-by-ny grid of quads into triangles (row-major vertex ids)."""
    px = nx if periodic_x else nx + 1
    cx = nx
    cy = ny
    tris = []
    for j in range(cy):
        for i in range(cx):
            i1 = (i + 1) % px if periodic_x else i + 1
            j1 = (j + 1) % (ny if periodic_y else ny + 1)
            rowlen = px
            a = j * rowlen + i
            b = j * rowlen + i1
            c = j1 * rowlen + i
            d = j1 * rowlen + i1
            tris.append((a, b, d))
            tris.append((a, d, c))
    return np.array(tris)


# ----------------------------------------------------------------------
# generators
# ----------------------------------------------------------------------
def _disk(p):
    R, h = p["radius"], p["h"]
    nr = int(math.ceil(R / (h / SQRT2)))
    profile = [(0.0, 0.0)] + [(R * i / nr, 0.0) for i in range(1, nr + 1)]
    v, t = _ring_mesh(profile, h / SQRT2, closed_start=True)
    return v[:, :2], t


def _annulus(p):
    a, b, h = p["r_in"], p["r_out"], p["h"]
    nr = int(math.ceil((b - a) / (h / SQRT2)))
    profile = [(a + (b - a) * i / nr, 0.0) for i in range(nr + 1)]
    v, t = _ring_mesh(profile, h / SQRT2)
    return v[:, :2], t


def _sphere_profile(radius, theta0, theta1, h):
    nr = int(math.ceil(radius * (theta1 - theta0) / (h / SQRT2)))
    th = np.linspace(theta0, theta1, nr + 1)
    return [(radius * math.sin(x), radius * math.cos(x)) for x in th]


def _sphere_minus_caps(p):
    R, a, h = p["radius"], p["cap_angle"], p["h"]
    profile = _sphere_profile(R, a, math.pi - a, h)
    return _ring_mesh(profile, h / SQRT2)


def _sphere(p):
    R, h = p["radius"], p["h"]
    profile = _sphere_profile(R, 0.0, math.pi, h)
    return _ring_mesh(profile, h / SQRT2, closed_start=True, closed_end=True)


def _rectangle(p):
    W, H, h = p["width"], p["height"], p["h"]
    nx = int(math.ceil(W / (h / SQRT2)))
    ny = int(math.ceil(H / (h / SQRT2)))
    xs = np.linspace(0.0, W, nx + 1)
    ys = np.linspace(0.0, H, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    v = np.column_stack([X.ravel(), Y.ravel()])
    return v, _grid_triangles(nx, ny, False, False)


def _flat_cylinder(p):
    C, L, h = p["circumference"], p["L"], p["h"]
    n = max(3, int(math.ceil(C / (h / SQRT2))))
    layers = max(1, int(math.ceil(L / (h / SQRT2))))
    return extrude(_circle(C, n), L, layers)


def _product_torus(p):
    L1, L2, h = p["L1"], p["L2"], p["h"]
    n1 = max(3, int(math.ceil(L1 / (h / SQRT2))))
    n2 = max(3, int(math.ceil(L2 / (h / SQRT2))))
    P1 = regular_polygon(n1, L1)
    P2 = regular_polygon(n2, L2)
    I, J = np.meshgrid(np.arange(n1), np.arange(n2))
    v = np.column_stack([P1[I.ravel()], P2[J.ravel()]])
    return v, _grid_triangles(n1, n2, True, True)


def _circle_shape(p):
    n = int(p.get("segments") or max(3, math.ceil(p["length"] / p["h"])))
    return _circle(p["length"], n)


def _jitter(v, t, seed, amount, h):
    """Seeded perturbation of interior vertices (boundary left fixed)."""
    if amount <= 0:
        return v
    mesh = SimplicialMesh(v, t, validate=False)
    interior = np.setdiff1d(np.arange(len(v)), mesh.boundary_vertices)
    rng = np.random.default_rng(seed)
    v = v.copy()
    v[interior] += amount * h * rng.uniform(-1, 1, size=(len(interior), v.shape[1]))
    return v


def generate_shape(spec):
    """Build the mesh described by ``spec`` (deterministic given its seed).

    Parameters
    ----------
    spec : ShapeSpec
        ``kind`` selects the generator, ``parameters`` override defaults.
        A ``jitter`` parameter (fraction of ``h``) perturbs interior
        vertices of planar and spherical shapes using ``seed``.

    Returns
    -------
    SimplicialMesh
    """
    p = spec.resolved()
    _validate(spec.kind, p)
    kind = spec.kind
    if kind == "custom_file":
        return load_mesh(p["path"])
    if kind == "flat_cylinder":
        return _flat_cylinder(p)
    if kind == "circle":
        return _circle_shape(p)
    builder = {
        "disk": _disk,
        "annulus": _annulus,
        "sphere_minus_caps": _sphere_minus_caps,
        "sphere": _sphere,
        "rectangle": _rectangle,
        "product_torus": _product_torus,
    }[kind]
    v, t = builder(p)
    if kind in ("disk", "annulus", "rectangle"):
        v = _jitter(v, t, spec.seed, float(p.get("jitter", 0.0)), p["h"])
    return SimplicialMesh(v, t)


def steklov_domain(spec, mesh=None):
    """Mesh on which Steklov checks run for ``spec``.

    Closed shapes (``product_torus``, ``sphere``, ``circle``) are turned
    into the cylinder ``[0, thickness] x shape``; shapes with boundary are
    returned unchanged.
    """
    mesh = generate_shape(spec) if mesh is None else mesh
    if mesh.has_boundary:
        return mesh
    p = spec.resolved()
    L = float(p.get("thickness") or 0.25)
    h = float(p.get("h", mesh.mean_edge_length))
    layers = max(1, int(math.ceil(L / (h / SQRT2))))
    return extrude(mesh, L, layers)
