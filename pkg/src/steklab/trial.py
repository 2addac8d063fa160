"""Trial-function families and discrete min-max certificates for sigma_k.

Any ``k+1`` linearly independent P1 functions ``f_0..f_k`` give
``sigma_k <= max over their span of u K u / u B u`` in the discrete
model. When the functions have cell-disjoint supports both forms are
diagonal on the span, so that maximum is ``max_i R(f_i)``.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.sparse.csgraph import dijkstra

from .bounds import _judge
from .eigen import harmonic_extension
from .errors import (
    ConstructionShortfall,
    HypothesisViolated,
    InvalidParameter,
    NotEnoughFunctions,
    SeparationInfeasible,
    ZeroBoundaryNorm,
)
from .fem import assemble_boundary_mass, assemble_stiffness, rayleigh_quotient
from .metric import _extrinsic_graph, _sigma_parts
from .separated import FiniteMetricMeasureSpace, separated_family

__all__ = [
    "TrialFamily",
    "build_trial_family",
    "eigenvector_family",
    "certify_sigma_k",
    "cell_disjoint",
]

CERT_TOL = 1e-9


@dataclass
class TrialFamily:
    """P1 trial functions (columns of ``functions``) with their quotients."""

    k: int
    functions: np.ndarray  # (V, m)
    centers: list
    radius: float
    rayleigh_quotients: list
    flavor: str = ""
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.functions.shape[1]


def cell_disjoint(mesh, functions):
    """True when no cell carries two functions that are nonzero on it."""
    F = np.asarray(functions)
    on_cell = (F[mesh.cells] != 0).any(axis=1)  # (cells, m)
    return bool(on_cell.sum(axis=1).max(initial=0) <= 1)


def _support_volume(mesh, f):
    return float(mesh.cell_volumes[(f[mesh.cells] != 0).any(axis=1)].sum())


def _quotients(K, B, F):
    return [rayleigh_quotient(K, B, F[:, i]) for i in range(F.shape[1])]


def _diam_proof(mesh, component, k, graph, delta, seed):
    _, verts = _sigma_parts(mesh, component)
    if delta is None:
        # double sweep estimate of Diam_M(Sigma_j)
        d0 = dijkstra(graph, directed=False, indices=verts[0])
        far = verts[np.argmax(d0[verts])]
        delta = float(dijkstra(graph, directed=False, indices=far)[verts].max())
    m = 2 * k + 2
    if len(verts) < m:
        raise SeparationInfeasible(f"component has {len(verts)} vertices, need {m}")
    rng = np.random.default_rng([seed, 0x7472, component])
    picked = [int(verts[rng.integers(len(verts))])]
    rows = [dijkstra(graph, directed=False, indices=picked[0])]
    mind = rows[0].copy()
    while len(picked) < m:
        nxt = int(verts[np.argmax(mind[verts])])
        picked.append(nxt)
        rows.append(dijkstra(graph, directed=False, indices=nxt))
        mind = np.minimum(mind, rows[-1])
    D = np.array([[r[p] for p in picked] for r in rows])
    sep = D[~np.eye(m, dtype=bool)].min()
    if sep < delta / (4 * k):
        raise SeparationInfeasible(
            f"best separation {sep:.4g} below delta/4k = {delta / (4 * k):.4g}")
    inner, outer = delta / (16 * k), delta / (8 * k)
    F = np.column_stack([np.clip((outer - r) / (outer - inner), 0.0, 1.0) for r in rows])
    vols = np.array([_support_volume(mesh, F[:, i]) for i in range(m)])
    keep = np.argsort(vols, kind="stable")[:k + 1]
    return F[:, keep], [picked[i] for i in keep], outer, {
        "delta": delta, "inner": inner, "outer": outer, "separation": float(sep),
        "support_volumes": [float(v) for v in vols[keep]]}


def _general_proof(mesh, component, k, graph, inv):
    if inv is None:
        raise InvalidParameter("general_proof needs the metric invariants")
    _, verts = _sigma_parts(mesh, component)
    n = mesh.boundary_dim
    Kc = 2 * k + 2
    N = inv.N_M_components[component]
    G = inv.growth_components[component]
    lam = inv.distortions[component]
    area = inv.boundary_volumes[component]
    D = dijkstra(graph, directed=False, indices=verts)[:, verts]
    w = np.asarray(assemble_boundary_mass(mesh, [component]).diagonal())[verts]
    X = FiniteMetricMeasureSpace(D, w)
    C2 = 8 * G * lam ** n * N ** 2
    r = (area / (C2 * Kc)) ** (1 / n)
    for _ in range(40):
        try:
            fam = separated_family(X, Kc, N, r)
            break
        except HypothesisViolated:
            r /= 2
        except ConstructionShortfall as exc:
            raise SeparationInfeasible(str(exc)) from exc
    else:
        raise SeparationInfeasible("no radius satisfies the separation hypothesis")
    F = []
    for A in fam.sets:
        d = dijkstra(graph, directed=False, indices=verts[A], min_only=True)
        F.append(np.clip(1 - d / r, 0.0, 1.0))
    F = np.column_stack(F)
    vols = np.array([_support_volume(mesh, F[:, i]) for i in range(Kc)])
    keep = np.argsort(vols, kind="stable")[:k + 1]
    centers = [int(verts[fam.sets[i][0]]) for i in keep]
    return F[:, keep], centers, r, {
        "r": r, "N": N, "C2": C2, "set_masses": [fam.masses[i] for i in keep],
        "separation": fam.min_separation,
        "support_volumes": [float(v) for v in vols[keep]]}


def build_trial_family(mesh, component, k, flavor="diam_proof", K=None,
                       delta=None, invariants=None, seed=0):
    """Trial functions with disjoint supports following one of the two proofs.

    ``diam_proof``: ``2k+2`` boundary centres pairwise ``delta/4k`` apart in
    ``d_M`` (farthest-point sampling), cutoffs equal to one within
    ``delta/16k`` and linear in ``d_M`` down to zero at ``delta/8k``; the
    ``k+1`` with smallest support volume are kept. ``delta`` defaults to an
    estimate of ``Diam_M(Sigma_j)``.

    ``general_proof``: a separated family of ``2k+2`` subsets of the
    component (needs ``invariants``), with ``f = max(0, 1 - d_M(., A)/r)``.
    """
    if k < 1:
        raise InvalidParameter("k must be at least 1")
    K = assemble_stiffness(mesh) if K is None else K
    B = assemble_boundary_mass(mesh)
    graph = _extrinsic_graph(mesh)
    if flavor == "diam_proof":
        F, centers, radius, meta = _diam_proof(mesh, component, k, graph, delta, seed)
    elif flavor == "general_proof":
        F, centers, radius, meta = _general_proof(mesh, component, k, graph, invariants)
    else:
        raise InvalidParameter(f"unknown flavor {flavor!r}")
    meta["cell_disjoint"] = cell_disjoint(mesh, F)
    return TrialFamily(k, F, centers, radius, _quotients(K, B, F), flavor, meta)


def eigenvector_family(mesh, spectrum, k, K=None):
    """Harmonic extensions of the first ``k+1`` discrete Steklov eigenvectors."""
    K = assemble_stiffness(mesh) if K is None else K
    B = assemble_boundary_mass(mesh)
    if spectrum.eigenvectors.shape[1] < k + 1:
        raise NotEnoughFunctions("spectrum holds fewer than k+1 eigenvectors")
    F = harmonic_extension(K, spectrum.support, spectrum.eigenvectors[:, :k + 1])
    return TrialFamily(k, F, [], 0.0, _quotients(K, B, F), "eigenvectors",
                       {"cell_disjoint": False})


def certify_sigma_k(spectrum, family, mesh, K=None, tol=CERT_TOL):
    """Min-max certificate ``sigma_k <= max over span(f_0..f_k)`` of ``R``.

    For cell-disjoint families the certificate is ``max_i R(f_i)``;
    otherwise it is the top eigenvalue of the pencil projected onto the
    span. Both numbers are recorded.
    """
    k = family.k
    if len(family) < k + 1:
        raise NotEnoughFunctions(f"need {k + 1} functions, got {len(family)}")
    K = assemble_stiffness(mesh) if K is None else K
    B = assemble_boundary_mass(mesh)
    F = family.functions[:, :k + 1]
    KF = F.T @ (K @ F)
    BF = F.T @ (B @ F)
    if np.any(np.diag(BF) <= 0):
        raise ZeroBoundaryNorm("a trial function vanishes on the boundary")
    span_max = float(sla.eigh(0.5 * (KF + KF.T), 0.5 * (BF + BF.T), eigvals_only=True)[-1])
    quot_max = float(max(family.rayleigh_quotients[:k + 1]))
    disjoint = cell_disjoint(mesh, F)
    rhs = quot_max if disjoint else span_max
    consts = {"max_rayleigh": quot_max, "span_max": span_max,
              "cell_disjoint": disjoint, "flavor": family.flavor}
    return _judge("trial_certificate", k, float(spectrum[k]), rhs, consts,
                  tol=tol, variant=family.flavor)
