"""Graph-geodesic distances on meshes and the metric constants built from them.

Extrinsic distances ``d_M`` are shortest paths in the full edge graph of
the mesh; intrinsic distances ``d_Sigma`` are shortest paths in the edge
graph of a single boundary component. Both are exact graph metrics, so
``d_M <= d_Sigma`` holds exactly on every sampled pair. All balls are
closed.

Plain edge graphs overestimate geodesics by a factor that does not shrink
under uniform refinement (zigzag paths). Triangle complexes therefore also
get one shortcut per interior edge: the straight segment joining the two
opposite vertices in the unfolded pair of triangles, when that segment
stays inside the pair. Shortcuts are genuine paths on the surface, so graph
distances remain upper bounds on geodesic distances.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra

from .errors import (
    ComponentNotFound,
    DisconnectedGraph,
    EmptyBoundaryError,
    InsufficientSamples,
    InvalidParameter,
)
from .fem import assemble_mass, lumped_boundary_weights
from .mesh import simplex_volumes
from .systole import edge_systole

__all__ = [
    "DistanceOracle",
    "MetricInvariantReport",
    "build_distance_oracle",
    "r_grid",
    "distortion",
    "packing_constant",
    "growth_constant",
    "ball_measure",
    "diameters",
    "injectivity_radius",
    "packing_transfer",
    "compute_invariants",
]

DEFAULT_SAMPLES = 256
R_POINTS = 16
# closed-ball comparisons absorb roundoff in summed path lengths
TIE_RTOL = 1e-9


def _shortcuts(vertices, triangles):
    """Unfolded cross-edge segments of adjacent triangle pairs.

    Returns ``(pairs, lengths)`` for every interior edge ``pq`` whose two
    opposite vertices ``a, b`` see each other across ``pq`` once the two
    triangles are laid flat.
    """
    tri = np.asarray(triangles)
    if len(tri) == 0 or tri.shape[1] != 3:
        return np.zeros((0, 2), dtype=np.int64), np.zeros(0)
    opp = np.concatenate([tri[:, i] for i in range(3)])
    sides = np.sort(np.concatenate(
        [np.delete(tri, i, axis=1) for i in range(3)]), axis=1)
    uniq, inv, cnt = np.unique(sides, axis=0, return_inverse=True,
                               return_counts=True)
    inv = np.asarray(inv).ravel()
    order = np.argsort(inv, kind="stable")
    start = np.concatenate([[0], np.cumsum(cnt)[:-1]])
    shared = np.flatnonzero(cnt == 2)
    a = opp[order[start[shared]]]
    b = opp[order[start[shared] + 1]]
    p, q = uniq[shared, 0], uniq[shared, 1]
    e = vertices[q] - vertices[p]
    L = np.linalg.norm(e, axis=1)

    def planar(x):
        w = vertices[x] - vertices[p]
        s = np.einsum("ij,ij->i", w, e) / L
        t = np.sqrt(np.maximum(np.einsum("ij,ij->i", w, w) - s ** 2, 0.0))
        return s, t

    sa, ta = planar(a)
    sb, tb = planar(b)
    cross = sa + (sb - sa) * ta / (ta + tb)
    ok = (cross > 0) & (cross < L) & (a != b)
    length = np.hypot(sa - sb, ta + tb)
    return np.column_stack([a[ok], b[ok]]), length[ok]


def _edge_graph(n, edges, vertices, triangles=None):
    edges = np.asarray(edges)
    w = np.linalg.norm(vertices[edges[:, 0]] - vertices[edges[:, 1]], axis=1)
    if triangles is not None:
        extra, ew = _shortcuts(vertices, triangles)
        edges = np.vstack([edges, extra])
        w = np.concatenate([w, ew])
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    vals = np.concatenate([w, w])
    # keep the shortest of parallel connections
    key = rows * n + cols
    order = np.lexsort((vals, key))
    first = np.concatenate([[True], key[order][1:] != key[order][:-1]])
    pick = order[first]
    return sparse.csr_matrix((vals[pick], (rows[pick], cols[pick])), shape=(n, n))


def _simplex_edges(simplices):
    s = np.asarray(simplices)
    m = s.shape[1]
    pairs = [s[:, [i, j]] for i in range(m) for j in range(i + 1, m)]
    return np.unique(np.sort(np.concatenate(pairs), axis=1), axis=0)


def _sigma_parts(mesh, component):
    """(faces, vertices) of boundary component ``component``.

    A closed mesh is its own single "boundary" component 0.
    """
    if not mesh.has_boundary:
        if component not in (None, 0):
            raise ComponentNotFound(f"closed mesh has no component {component}")
        return mesh.cells, np.arange(mesh.n_vertices)
    if component is None or not 0 <= component < mesh.n_components:
        raise ComponentNotFound(f"no boundary component {component!r}")
    faces = mesh.component_faces(component)
    return faces, np.unique(faces)


def _triangles_of(simplices):
    simplices = np.asarray(simplices)
    return simplices if simplices.shape[1] == 3 else None


def _intrinsic_graph(mesh, component):
    faces, _ = _sigma_parts(mesh, component)
    return _edge_graph(mesh.n_vertices, _simplex_edges(faces), mesh.vertices,
                       _triangles_of(faces))


def _extrinsic_graph(mesh):
    # boundary triangle shortcuts keep every intrinsic path available here
    tri = _triangles_of(mesh.cells)
    if tri is None and mesh.has_boundary:
        tri = _triangles_of(mesh.boundary_faces)
    return _edge_graph(mesh.n_vertices, mesh.edges, mesh.vertices, tri)


def _farthest_points(graph, candidates, count, rng):
    """Farthest-point sample of ``candidates``; returns (sample, rows)."""
    candidates = np.asarray(candidates)
    if count >= len(candidates):
        rows = dijkstra(graph, directed=False, indices=candidates)
        return candidates.copy(), rows
    start = candidates[rng.integers(len(candidates))]
    picked, rows = [start], []
    mind = np.full(graph.shape[0], np.inf)
    for _ in range(count):
        row = dijkstra(graph, directed=False, indices=picked[-1])
        rows.append(row)
        mind = np.minimum(mind, row)
        if len(picked) == count:
            break
        nxt = candidates[np.argmax(mind[candidates])]
        picked.append(nxt)
    return np.array(picked), np.vstack(rows)


def _component_count(mesh):
    return mesh.n_components if mesh.has_boundary else 1


def sample_boundary(mesh, samples=DEFAULT_SAMPLES, seed=0):
    """Farthest-point samples (intrinsic metric) per boundary component.

    Returns ``{label: (sample_vertices, intrinsic_rows)}``. Each component
    draws its start vertex from its own named substream of ``seed``.
    """
    if samples < 2:
        raise InsufficientSamples("need at least two samples")
    out = {}
    for j in range(_component_count(mesh)):
        comp = None if not mesh.has_boundary else j
        graph = _intrinsic_graph(mesh, comp)
        _, verts = _sigma_parts(mesh, comp)
        rng = np.random.default_rng([seed, 0x5A4D, j])
        sample, rows = _farthest_points(graph, verts, samples, rng)
        if np.isinf(rows[:, verts]).any():
            raise DisconnectedGraph(f"boundary component {j} is not edge-connected")
        out[j] = (sample, rows)
    return out


@dataclass
class DistanceOracle:
    """Pairwise graph distances over a sample of boundary vertices.

    ``rows[i]`` holds distances from ``sample[i]`` to every mesh vertex
    (``inf`` where unreachable, e.g. other components for intrinsic
    oracles); ``dist`` is its restriction to the sample.
    """

    space: str
    sample: np.ndarray
    rows: np.ndarray
    labels: np.ndarray
    component: int = None
    seed: int = 0

    @property
    def dist(self):
        return self.rows[:, self.sample]

    def restrict(self, component):
        keep = self.labels == component
        if not keep.any():
            raise ComponentNotFound(f"no samples on component {component}")
        return DistanceOracle(self.space, self.sample[keep], self.rows[keep],
                              self.labels[keep], component, self.seed)


def build_distance_oracle(mesh, space="extrinsic", samples=DEFAULT_SAMPLES,
                          seed=0, component=None, _cache=None):
    """Graph-geodesic distance oracle over farthest-point boundary samples.

    Parameters
    ----------
    space : {"extrinsic", "intrinsic"}
        ``extrinsic`` uses every mesh edge and samples all components;
        ``intrinsic`` uses only edges of boundary component ``component``.
    samples : int
        Sample size per boundary component (all vertices if fewer).
    """
    parts = sample_boundary(mesh, samples, seed) if _cache is None else _cache
    if space == "intrinsic":
        j = 0 if component is None else component
        if j not in parts:
            raise ComponentNotFound(f"no boundary component {j}")
        sample, rows = parts[j]
        return DistanceOracle("intrinsic", sample, rows,
                              np.full(len(sample), j), j, seed)
    if space != "extrinsic":
        raise InvalidParameter(f"unknown space {space!r}")
    if not mesh.has_boundary:
        raise EmptyBoundaryError("extrinsic distances need a boundary")
    sample = np.concatenate([parts[j][0] for j in sorted(parts)])
    labels = np.concatenate([np.full(len(parts[j][0]), j) for j in sorted(parts)])
    rows = dijkstra(_extrinsic_graph(mesh), directed=False, indices=sample)
    oracle = DistanceOracle("extrinsic", sample, rows, labels, None, seed)
    if component is not None:
        return oracle.restrict(component)
    return oracle


def r_grid(min_radius, max_radius, points=R_POINTS):
    """Log-spaced radii; a single radius when the range is empty."""
    if max_radius <= min_radius:
        return np.array([max_radius])
    return np.geomspace(min_radius, max_radius, points)


# ----------------------------------------------------------------------
def distortion(extrinsic, intrinsic):
    """Per-component distortion and its maximum.

    Parameters
    ----------
    extrinsic : DistanceOracle
        Extrinsic oracle over all components.
    intrinsic : dict
        ``{label: intrinsic DistanceOracle}`` on the same samples.

    Returns
    -------
    (list of float, float)
    """
    lams = []
    for j in sorted(intrinsic):
        io = intrinsic[j]
        eo = extrinsic.restrict(j)
        if len(io.sample) < 2:
            raise InsufficientSamples(f"component {j} has fewer than 2 samples")
        verts = np.flatnonzero(np.isfinite(io.rows[0]))
        dS = io.rows[:, verts]
        dM = eo.rows[:, verts]
        ok = dM > 0
        ratio = np.max(dS[ok] / dM[ok]) if ok.any() else 1.0
        lams.append(max(1.0, float(ratio)))
    return lams, max(lams)


def packing_constant(oracle, radii):
    """Largest greedy r/2-net of any sampled closed r-ball, over ``radii``.

    For each centre the ball's points are inserted in order of distance
    from the centre; a point joins the net unless an earlier net point is
    within r/2. The net's closed r/2-balls cover the ball.
    """
    D = oracle.dist
    if D.shape[0] == 1:
        return 1
    best = 1
    order = np.argsort(D, axis=1, kind="stable")
    for i in range(D.shape[0]):
        di = D[i, order[i]]
        for r in radii:
            ball = order[i][di <= r * (1 + TIE_RTOL)]
            covered = np.zeros(len(ball), dtype=bool)
            count, pos = 0, 0
            while pos < len(ball):
                count += 1
                covered |= D[ball[pos], ball] <= 0.5 * r * (1 + TIE_RTOL)
                free = np.flatnonzero(~covered[pos:])
                pos = pos + free[0] if len(free) else len(ball)
            best = max(best, count)
    return best


def ball_measure(oracle, weights, x, r, segments=None, seglen=None):
    """Measure of the closed ball of radius ``r`` around sample point ``x``.

    ``x`` indexes ``oracle.sample``. ``weights`` are per-vertex measures
    (lumped boundary mass). For curves, passing ``segments`` (an ``(F, 2)``
    vertex array) and their lengths integrates the measure exactly along
    each segment instead of lumping it at vertices.
    """
    row = oracle.rows[x]
    if segments is not None:
        return _segment_ball(row, np.asarray(segments), np.asarray(seglen), r)
    return float(weights[row <= r * (1 + TIE_RTOL)].sum())


def _segment_ball(row, segments, seglen, r):
    du, dv = row[segments[:, 0]], row[segments[:, 1]]
    part = np.maximum(0.0, r - du) + np.maximum(0.0, r - dv)
    return float(np.minimum(seglen, part).sum())


def growth_constant(oracle, weights, n, radii, segments=None, seglen=None):
    """``max |B(x, r)| / r^n`` over sampled centres and ``radii``.

    For curves (n = 1) pass ``segments`` and ``seglen`` to integrate the
    ball measure exactly along edges; otherwise vertex weights are summed.
    """
    best = 0.0
    for i in range(len(oracle.sample)):
        row = oracle.rows[i]
        for r in radii:
            mass = ball_measure(oracle, weights, i, r, segments, seglen)
            best = max(best, mass / r ** n)
    return best


def diameters(extrinsic, intrinsic, segments=None):
    """``(Diam_M(Sigma_j), Diam(Sigma_j))`` per component, from sampled rows.

    For curves pass ``segments`` (``{label: (F, 2) vertex array}``): the
    farthest point of a segment ``uv`` of length ``s`` is then at distance
    ``(d(u) + d(v) + s) / 2``, which makes the intrinsic diameter exact
    instead of a vertex-to-vertex maximum.
    """
    out = []
    for j in sorted(intrinsic):
        io = intrinsic[j]
        verts = np.flatnonzero(np.isfinite(io.rows[0]))
        if len(verts) < 2:
            raise InsufficientSamples(f"component {j} has fewer than 2 vertices")
        dS = float(io.rows[:, verts].max())
        if segments is not None and j in segments:
            seg, seglen = segments[j]
            du, dv = io.rows[:, seg[:, 0]], io.rows[:, seg[:, 1]]
            far = np.minimum(0.5 * (du + dv + seglen), np.maximum(du, dv) + seglen)
            dS = max(dS, float(far.max()))
        if extrinsic is None:
            dM = dS
        else:
            dM = float(extrinsic.restrict(j).rows[:, verts].max())
        out.append((dM, dS))
    return out


def injectivity_radius(mesh, component=None, diameter=None, override=None):
    """Injectivity radius of a boundary component (or of a closed mesh).

    Curves: exactly half the length. Surfaces: half the shortest
    noncontractible edge loop, a conservative estimate, clamped to the
    intrinsic diameter when given; ``inf`` for spheres unless ``override``
    is supplied.

    Returns
    -------
    (float, str)
        Value and how it was obtained (``exact``, ``lower_estimate``,
        ``override``, ``unavailable``).
    """
    faces, verts = _sigma_parts(mesh, component)
    n = faces.shape[1] - 1
    if override is not None:
        return float(override), "override"
    if n == 1:
        return float(simplex_volumes(mesh.vertices, faces).sum()) / 2, "exact"
    if n == 2:
        val = edge_systole(mesh.vertices, faces) / 2
        if not math.isfinite(val):
            return math.inf, "unavailable"
        if diameter is not None:
            val = min(val, diameter)
        return val, "lower_estimate"
    raise InvalidParameter(f"no injectivity-radius estimator for n={n}")


def packing_transfer(b, N_sigma, lam):
    """Packing constant ``ceil(b * N_sigma ** log2(2 * lam))`` for (Sigma, d_M)."""
    if lam < 1:
        raise InvalidParameter("distortion must be at least 1")
    if b < 1 or N_sigma < 1:
        raise InvalidParameter("b and N_sigma must be positive")
    val = b * N_sigma ** math.log2(2 * lam)
    return int(math.ceil(val * (1 - 1e-12)))


# ----------------------------------------------------------------------
@dataclass
class MetricInvariantReport:
    """Every metric constant of a mesh, with sampling metadata.

    Per-component lists are indexed by boundary label. For closed meshes
    the mesh itself plays the role of the single component and extrinsic
    quantities are ``None``.
    """

    n: int
    b: int
    volume: float
    boundary_volumes: list
    distortions: list
    distortion: float
    N_M: int
    N_M_components: list
    N_sigma: int
    N_sigma_components: list
    growth_components: list
    growth: float
    diam_extrinsic: list
    diam_intrinsic: list
    diam_extrinsic_global: float
    inj: list
    inj_method: list
    sampling: dict = field(default_factory=dict)
    radius_extrinsic: list = None  # min over sampled x of max d_M(x, Sigma_j)

    def to_dict(self):
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return None
            if isinstance(x, (list, tuple)):
                return [clean(y) for y in x]
            if isinstance(x, dict):
                return {k: clean(v) for k, v in x.items()}
            if isinstance(x, (np.floating,)):
                return clean(float(x))
            if isinstance(x, (np.integer,)):
                return int(x)
            return x

        return clean({
            "n": self.n,
            "b": self.b,
            "volume": self.volume,
            "boundary_volumes": self.boundary_volumes,
            "distortions": self.distortions,
            "distortion": self.distortion,
            "N_M": self.N_M,
            "N_M_components": self.N_M_components,
            "N_sigma": self.N_sigma,
            "N_sigma_components": self.N_sigma_components,
            "growth_components": self.growth_components,
            "growth": self.growth,
            "diam_extrinsic": self.diam_extrinsic,
            "diam_intrinsic": self.diam_intrinsic,
            "diam_extrinsic_global": self.diam_extrinsic_global,
            "inj": self.inj,
            "inj_method": self.inj_method,
            "radius_extrinsic": self.radius_extrinsic,
            "sampling": self.sampling,
            "notes": [
                "packing and growth constants are sampled lower estimates",
                "injectivity radii of surfaces are conservative loop estimates",
            ],
        })


def compute_invariants(mesh, samples=DEFAULT_SAMPLES, seed=0, r_points=R_POINTS,
                       inj_override=None):
    """Estimate distortion, packing, growth, diameters and injectivity radii.

    ``inj_override`` maps component labels to user-supplied injectivity
    radii (needed for simply connected surface components).
    """
    inj_override = inj_override or {}
    parts = sample_boundary(mesh, samples, seed)
    comps = sorted(parts)
    intrinsic = {j: build_distance_oracle(mesh, "intrinsic", samples, seed, j, _cache=parts)
                 for j in comps}
    closed = not mesh.has_boundary
    extrinsic = None if closed else build_distance_oracle(
        mesh, "extrinsic", samples, seed, _cache=parts)

    if closed:
        n = mesh.dim
        sigma_vols = [mesh.volume]
        weights = np.asarray(assemble_mass(mesh).diagonal())
    else:
        n = mesh.boundary_dim
        sigma_vols = list(mesh.boundary_volumes)
        weights = lumped_boundary_weights(mesh)

    segs = None
    if n == 1:
        segs = {}
        for j in comps:
            faces, _ = _sigma_parts(mesh, None if closed else j)
            segs[j] = (faces, simplex_volumes(mesh.vertices, faces))
    diam = diameters(extrinsic, intrinsic, segs)
    radius = [None] * len(comps)
    if not closed:
        for j in comps:
            verts = np.flatnonzero(np.isfinite(intrinsic[j].rows[0]))
            radius[j] = float(extrinsic.restrict(j).rows[:, verts].max(axis=1).min())
    h2 = 2 * mesh.mean_edge_length
    grids_int = {j: r_grid(h2, diam[j][1], r_points) for j in comps}

    lams, lam = ([1.0] * len(comps), 1.0) if closed else distortion(extrinsic, intrinsic)

    N_sig = [packing_constant(intrinsic[j], grids_int[j]) for j in comps]
    if closed:
        N_M, N_M_c, diam_M_global, grid_ext = None, [None], None, []
    else:
        diam_M_global = float(max(
            extrinsic.rows[:, mesh.boundary_vertices].max(), 0.0))
        grid_ext = r_grid(h2, diam_M_global, r_points)
        N_M = packing_constant(extrinsic, grid_ext)
        N_M_c = [packing_constant(extrinsic.restrict(j), r_grid(h2, diam[j][0], r_points))
                 for j in comps]

    gammas = []
    for j in comps:
        faces, _ = _sigma_parts(mesh, None if closed else j)
        if n == 1:
            seglen = simplex_volumes(mesh.vertices, faces)
            g = growth_constant(intrinsic[j], None, 1, grids_int[j], faces, seglen)
        else:
            g = growth_constant(intrinsic[j], weights, n, grids_int[j])
        gammas.append(g)

    inj, how = [], []
    for j in comps:
        val, method = injectivity_radius(mesh, None if closed else j,
                                         diameter=diam[j][1],
                                         override=inj_override.get(j))
        inj.append(val)
        how.append(method)

    return MetricInvariantReport(
        n=n,
        b=len(comps),
        volume=mesh.volume,
        boundary_volumes=sigma_vols,
        distortions=lams,
        distortion=lam,
        N_M=N_M,
        N_M_components=N_M_c,
        N_sigma=max(N_sig),
        N_sigma_components=N_sig,
        growth_components=gammas,
        growth=max(gammas),
        diam_extrinsic=[d[0] for d in diam] if not closed else [None],
        diam_intrinsic=[d[1] for d in diam],
        diam_extrinsic_global=diam_M_global,
        inj=inj,
        inj_method=how,
        radius_extrinsic=radius,
        sampling={
            "samples_requested": samples,
            "sample_sizes": [int(len(parts[j][0])) for j in comps],
            "seed": seed,
            "r_points": r_points,
            "r_min": h2,
            "r_grid_extrinsic": [float(x) for x in grid_ext],
            "r_grid_intrinsic": {str(j): [float(x) for x in grids_int[j]] for j in comps},
            "ball_convention": "closed",
        },
    )
