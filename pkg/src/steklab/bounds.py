"""Eigenvalue upper bounds evaluated on computed spectra and invariants.

Every evaluator returns a :class:`BoundReport` with the two sides of the
inequality, the constants that entered the right-hand side, and a status:

``pass``
    ``lhs <= rhs * (1 + TOL)``.
``inconclusive``
    fails the strict test but passes once the right-hand side is inflated
    by the metric slack factor (sampled N and Gamma are lower estimates).
``fail``
    neither.
``vacuous``
    the bound carries no information for these inputs.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import dijkstra
from scipy.special import gamma as euler_gamma

from .errors import (
    EmptySubset,
    InvalidParameter,
    MissingInvariant,
    OverlappingSubsets,
)
from .fem import lumped_boundary_weights

__all__ = [
    "BoundReport",
    "sphere_volume",
    "gamma_const",
    "K_const",
    "isoperimetric_ratio",
    "bound_thm_main",
    "bound_thm_general",
    "bound_reformulation",
    "bound_thm_diam",
    "cylinder_sigma_from_lambda",
    "bound_cor_gny",
    "bound_cor_berger_croke",
    "concentration_check",
    "gromov_milman_check",
    "gm_neighborhood_bound",
    "angular_subset",
]

TOL = 1e-6


@dataclass
class BoundReport:
    inequality_id: str
    k: int
    lhs: float
    rhs: float
    constants_used: dict = field(default_factory=dict)
    passed: bool = False
    status: str = "fail"
    slack: float = math.nan
    component: int = None
    variant: str = None

    def to_dict(self):
        def num(x):
            if isinstance(x, (float, np.floating)):
                x = float(x)
                return x if math.isfinite(x) else None
            if isinstance(x, np.integer):
                return int(x)
            if isinstance(x, dict):
                return {k: num(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [num(v) for v in x]
            return x

        return num({
            "inequality_id": self.inequality_id,
            "k": self.k,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "constants_used": self.constants_used,
            "pass": self.passed,
            "status": self.status,
            "slack": self.slack,
            "component": self.component,
            "variant": self.variant,
        })


def _judge(ineq, k, lhs, rhs, consts, slack_factor=1.0, component=None,
           variant=None, tol=TOL, direction="le"):
    """Build a report; ``direction="ge"`` checks ``lhs >= rhs`` instead."""
    if slack_factor < 1:
        raise InvalidParameter("slack factor must be at least 1")
    lhs, rhs = float(lhs), float(rhs)
    if direction == "le":
        strict = lhs <= rhs * (1 + tol)
        loose = lhs <= rhs * slack_factor * (1 + tol)
        slack = rhs / lhs if lhs > 0 else math.inf
    else:
        strict = lhs >= rhs * (1 - tol) if rhs > 0 else lhs >= rhs
        loose = lhs * slack_factor >= rhs * (1 - tol) if rhs > 0 else strict
        slack = lhs / rhs if rhs > 0 else math.inf
    status = "pass" if strict else ("inconclusive" if loose else "fail")
    consts = dict(consts)
    consts.setdefault("slack_factor", slack_factor)
    return BoundReport(ineq, int(k), lhs, rhs, consts, strict, status, slack,
                       component, variant)


def _need(**values):
    for name, v in values.items():
        if v is None or (isinstance(v, float) and not math.isfinite(v)):
            raise MissingInvariant(f"invariant {name} is unavailable")
        if isinstance(v, (int, float)) and v <= 0:
            raise MissingInvariant(f"invariant {name} must be positive, got {v}")


def _value(spectrum, k):
    if k < 1:
        raise InvalidParameter("k must be at least 1")
    if np.isscalar(spectrum):
        return float(spectrum)
    return float(spectrum[k])


# ----------------------------------------------------------------------
# dimensional constants

def sphere_volume(n):
    """Volume of the unit n-sphere, ``2 pi^((n+1)/2) / Gamma((n+1)/2)``."""
    if n < 0:
        raise InvalidParameter("n must be nonnegative")
    return 2 * math.pi ** ((n + 1) / 2) / euler_gamma((n + 1) / 2)


def gamma_const(n):
    """``2^(n-1) s_{n-1}^n / (n^n s_n^(n-1))``."""
    if n < 1:
        raise InvalidParameter("n must be at least 1")
    return 2.0 ** (n - 1) * sphere_volume(n - 1) ** n / (
        n ** n * sphere_volume(n) ** (n - 1))


def K_const(n):
    """``K(n) = 2^(5n+8) / gamma(n)``, cross-checked against its expanded form."""
    first = 2.0 ** (5 * n + 8) / gamma_const(n)
    second = 2.0 ** (4 * n + 9) * n ** n * sphere_volume(n) ** (n - 1) / sphere_volume(n - 1) ** n
    if abs(first - second) > 1e-12 * abs(first):
        raise AssertionError(f"K({n}) closed forms disagree: {first!r} vs {second!r}")
    return first


def K_const_forms(n):
    """Both closed forms of K(n), for consistency checks."""
    return (2.0 ** (5 * n + 8) / gamma_const(n),
            2.0 ** (4 * n + 9) * n ** n * sphere_volume(n) ** (n - 1) / sphere_volume(n - 1) ** n)


def isoperimetric_ratio(boundary_volume, volume, n):
    """``I(M) = |Sigma| / |M|^(n/(n+1))``."""
    return boundary_volume / volume ** (n / (n + 1))


# ----------------------------------------------------------------------
# Steklov bounds in terms of packing, growth and distortion

def bound_thm_main(spectrum, inv, k, slack_factor=1.0):
    """``sigma_k <= 512 b^2 N_M^3 Gamma Lambda^2 |M| k^(2/n) / |Sigma|^((n+2)/n)``."""
    n, b = inv.n, inv.b
    area = float(sum(inv.boundary_volumes))
    _need(N_M=inv.N_M, Gamma=inv.growth, Lambda=inv.distortion, volume=inv.volume)
    rhs = (512 * b ** 2 * inv.N_M ** 3 * inv.growth * inv.distortion ** 2
           * inv.volume * k ** (2 / n) / area ** ((n + 2) / n))
    consts = {"b": b, "N_M": inv.N_M, "Gamma": inv.growth,
              "Lambda": inv.distortion, "volume": inv.volume,
              "boundary_volume": area, "n": n}
    return _judge("thm_main", k, _value(spectrum, k), rhs, consts, slack_factor)


def bound_thm_general(spectrum, inv, component, k, slack_factor=1.0):
    """Single-component form with that component's N, Gamma, Lambda and volume.

    Taking the largest component recovers the main bound, since its
    volume is at least ``|Sigma| / b``.
    """
    j = component
    n = inv.n
    N = inv.N_M_components[j]
    G = inv.growth_components[j]
    lam = inv.distortions[j]
    area = inv.boundary_volumes[j]
    _need(N=N, Gamma=G, Lambda=lam, volume=inv.volume, component_volume=area)
    rhs = 512 * N ** 3 * G * lam ** 2 * inv.volume * k ** (2 / n) / area ** ((n + 2) / n)
    consts = {"N": N, "Gamma": G, "Lambda": lam, "volume": inv.volume,
              "component_volume": area, "n": n}
    return _judge("thm_general", k, _value(spectrum, k), rhs, consts,
                  slack_factor, component=j)


def bound_reformulation(spectrum, inv, k, slack_factor=1.0):
    """Scale-free form ``sigma_k |Sigma|^(1/n) <= 512 b^2 N^3 Gamma Lambda^2 k^(2/n) / I^((n+1)/n)``."""
    n, b = inv.n, inv.b
    area = float(sum(inv.boundary_volumes))
    _need(N_M=inv.N_M, Gamma=inv.growth, Lambda=inv.distortion, volume=inv.volume)
    iso = isoperimetric_ratio(area, inv.volume, n)
    lhs = _value(spectrum, k) * area ** (1 / n)
    rhs = (512 / iso ** ((n + 1) / n) * b ** 2 * inv.N_M ** 3 * inv.growth
           * inv.distortion ** 2 * k ** (2 / n))
    consts = {"I": iso, "b": b, "N_M": inv.N_M, "Gamma": inv.growth,
              "Lambda": inv.distortion, "n": n}
    return _judge("reformulation", k, lhs, rhs, consts, slack_factor)


# ----------------------------------------------------------------------
# diameter bounds

def bound_thm_diam(spectrum, inv, component, k, slack_factor=1.0):
    """``sigma_k <= K(n) |M| / Diam_M^(n+2) (Diam / inj)^n k^(n+1)`` for one component."""
    j, n = component, inv.n
    dM = inv.diam_extrinsic[j]
    dS = inv.diam_intrinsic[j]
    inj = inv.inj[j]
    _need(Diam_M=dM, Diam=dS, inj=inj, volume=inv.volume)
    K = K_const(n)
    rhs = K * inv.volume / dM ** (n + 2) * (dS / inj) ** n * k ** (n + 1)
    consts = {"K": K, "volume": inv.volume, "Diam_M": dM, "Diam": dS,
              "inj": inj, "inj_method": inv.inj_method[j], "n": n}
    return _judge("thm_diam", k, _value(spectrum, k), rhs, consts,
                  slack_factor, component=j)


def cylinder_sigma_from_lambda(lam, L):
    """``sqrt(lam) tanh(sqrt(lam) L)``: the small-L Steklov branch over a cylinder."""
    if lam < 0 or L <= 0:
        raise InvalidParameter("need lam >= 0 and L > 0")
    c = math.sqrt(lam)
    return c * math.tanh(c * L)


def bound_cor_gny(lam_spectrum, area, N_sigma, growth, n, k, slack_factor=1.0):
    """``lambda_k |Sigma|^(2/n) <= 2048 Gamma N_Sigma^3 k^(2/n)`` on a closed manifold."""
    _need(N_Sigma=N_sigma, Gamma=growth, volume=area)
    lhs = _value(lam_spectrum, k) * area ** (2 / n)
    rhs = 2048 * growth * N_sigma ** 3 * k ** (2 / n)
    consts = {"N_Sigma": N_sigma, "Gamma": growth, "volume": area, "n": n}
    return _judge("cor_gny", k, lhs, rhs, consts, slack_factor)


def bound_cor_berger_croke(lam_spectrum, diam, inj, area, n, k, slack_factor=1.0):
    """``lambda_k diam^2 <= K(n) |Sigma| k^(n+1) / inj^n`` on a closed manifold.

    ``constants_used["lambda_bound"]`` is the implied bound on
    ``lambda_k`` itself, ``rhs / diam^2``.
    """
    _need(diam=diam, inj=inj, volume=area)
    K = K_const(n)
    lhs = _value(lam_spectrum, k) * diam ** 2
    rhs = K * area * k ** (n + 1) / inj ** n
    consts = {"K": K, "diam": diam, "inj": inj, "volume": area, "n": n,
              "lambda_bound": rhs / diam ** 2}
    return _judge("cor_berger_croke", k, lhs, rhs, consts, slack_factor)


def concentration_check(spectrum, inv, component, k, sharp=False, slack_factor=1.0):
    """Is boundary component ``j`` inside an extrinsic ball of radius ``gamma_j``?

    ``gamma_j = C_j (|M| / sigma_k)^(1/(n+2)) k^((n+1)/(n+2))`` with
    ``C_j = K(n) (Diam / inj)^(n/(n+2))``. With ``sharp=True`` the constant
    uses ``K(n)^(1/(n+2))`` instead, which is what solving the diameter
    bound for ``Diam_M`` gives. ``lhs`` is the smallest sampled radius
    ``min_x max_y d_M(x, y)`` over the component.
    """
    j, n = component, inv.n
    sigma = _value(spectrum, k)
    dS, inj = inv.diam_intrinsic[j], inv.inj[j]
    radius = None if inv.radius_extrinsic is None else inv.radius_extrinsic[j]
    _need(Diam=dS, inj=inj, volume=inv.volume, sigma_k=sigma, radius=radius)
    K = K_const(n)
    Kfac = K ** (1 / (n + 2)) if sharp else K
    C = Kfac * (dS / inj) ** (n / (n + 2))
    g = C * (inv.volume / sigma) ** (1 / (n + 2)) * k ** ((n + 1) / (n + 2))
    consts = {"C_j": C, "gamma_j": g, "K": K, "Diam": dS, "inj": inj,
              "volume": inv.volume, "sigma_k": sigma, "n": n}
    return _judge("cor_concentration", k, radius, g, consts, slack_factor,
                  component=j, variant="sharp" if sharp else "as_printed")


# ----------------------------------------------------------------------
# Gromov-Milman type concentration

def angular_subset(mesh, lo, hi, plane=(0, 1), center=None):
    """Boundary vertices whose polar angle in ``plane`` lies in ``[lo, hi]``.

    Angles are taken about ``center`` (default: centroid of the boundary
    vertices) and compared modulo 2 pi.
    """
    bv = mesh.boundary_vertices
    pts = mesh.vertices[bv][:, list(plane)]
    c = pts.mean(axis=0) if center is None else np.asarray(center, dtype=float)
    ang = np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0])
    rel = np.mod(ang - lo, 2 * math.pi)
    return bv[rel <= (hi - lo) + 1e-12]


def _extrinsic_graph(mesh):
    from .metric import _extrinsic_graph as g

    return g(mesh)


def _subset_measure(weights, subset, name):
    subset = np.asarray(subset, dtype=np.int64)
    if len(subset) == 0:
        raise EmptySubset(f"subset {name} is empty")
    m = float(weights[subset].sum())
    if m <= 0:
        raise EmptySubset(f"subset {name} has zero boundary measure")
    return m


def gromov_milman_check(mesh, spectrum, A, B, slack_factor=1.0, graph=None):
    """``rho^2 <= (|M| / sigma_1) (1/|A| + 1/|B|)`` with ``rho = d_M(A, B)``."""
    w = lumped_boundary_weights(mesh)
    mA = _subset_measure(w, A, "A")
    mB = _subset_measure(w, B, "B")
    if np.intersect1d(A, B).size:
        raise OverlappingSubsets("subsets A and B share vertices")
    graph = _extrinsic_graph(mesh) if graph is None else graph
    dist = dijkstra(graph, directed=False, indices=np.asarray(A), min_only=True)
    rho = float(dist[np.asarray(B)].min())
    sigma1 = _value(spectrum, 1)
    _need(sigma_1=sigma1)
    rhs = mesh.volume / sigma1 * (1 / mA + 1 / mB)
    consts = {"rho": rho, "measure_A": mA, "measure_B": mB,
              "volume": mesh.volume, "sigma_1": sigma1}
    return _judge("prop_gromov_milman", 1, rho ** 2, rhs, consts, slack_factor)


def gm_neighborhood_bound(mesh, spectrum, A, rho, graph=None):
    """``|A^rho| >= |Sigma| - (sigma_1 rho^2 / |M| - 1/|A|)^(-1)``, ``A^rho`` open.

    Vacuous (status ``vacuous``, passed) when ``sigma_1 rho^2 / |M| <= 1/|A|``.
    """
    w = lumped_boundary_weights(mesh)
    mA = _subset_measure(w, A, "A")
    sigma1 = _value(spectrum, 1)
    graph = _extrinsic_graph(mesh) if graph is None else graph
    dist = dijkstra(graph, directed=False, indices=np.asarray(A), min_only=True)
    bv = mesh.boundary_vertices
    lhs = float(w[bv[dist[bv] < rho]].sum())
    area = float(w.sum())
    gap = sigma1 * rho ** 2 / mesh.volume - 1 / mA
    consts = {"rho": rho, "measure_A": mA, "boundary_volume": area,
              "volume": mesh.volume, "sigma_1": sigma1, "gap": gap}
    if gap <= 0:
        return BoundReport("gm_consequence", 1, lhs, -math.inf, consts, True,
                           "vacuous", math.inf)
    rhs = area - 1 / gap
    if rhs <= 0:
        consts["note"] = "right-hand side nonpositive"
        return BoundReport("gm_consequence", 1, lhs, rhs, consts, True,
                           "vacuous", math.inf)
    return _judge("gm_consequence", 1, lhs, rhs, consts, direction="ge")
