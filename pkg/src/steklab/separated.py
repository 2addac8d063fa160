"""Separated families of heavy subsets in finite metric-measure spaces.

Given a packing constant ``N`` and a radius ``r`` at which no closed ball is
heavy, a greedy construction returns ``K`` subsets, each carrying at least
``mu(X) / (2 N K)`` of the mass and pairwise at distance at least ``3 r``.
Both conclusions are checked by brute force before a family is returned.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionShortfall, HypothesisViolated, InvalidParameter

__all__ = ["FiniteMetricMeasureSpace", "SeparatedFamily", "separated_family"]


@dataclass(frozen=True)
class FiniteMetricMeasureSpace:
    """Finite metric space with point masses.

    Attributes
    ----------
    distances : (m, m) array
        Symmetric, zero diagonal.
    masses : (m,) array
        Nonnegative weights.
    """

    distances: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        D = np.asarray(self.distances, dtype=float)
        mu = np.asarray(self.masses, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] != len(mu):
            raise InvalidParameter("distance matrix and masses disagree in size")
        if np.any(mu < 0):
            raise InvalidParameter("masses must be nonnegative")
        object.__setattr__(self, "distances", D)
        object.__setattr__(self, "masses", mu)

    @classmethod
    def from_points(cls, points, masses=None, metric="euclidean"):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if metric == "euclidean":
            D = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
        elif metric == "cityblock":
            D = np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=2)
        else:
            raise InvalidParameter(f"unknown metric {metric!r}")
        mu = np.ones(len(pts)) if masses is None else masses
        return cls(D, mu)

    @property
    def total(self):
        return float(self.masses.sum())

    def __len__(self):
        return len(self.masses)

    def ball_masses(self, r):
        """Closed-ball masses ``mu(B(x, r))`` for every point ``x``."""
        return (self.distances <= r) @ self.masses


@dataclass
class SeparatedFamily:
    sets: list
    masses: list
    min_separation: float
    mass_target: float
    separation_target: float
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.sets)


def _certify(X, sets, mass_target, sep_target):
    masses = [float(X.masses[s].sum()) for s in sets]
    sep = np.inf
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            sep = min(sep, float(X.distances[np.ix_(sets[i], sets[j])].min()))
    ok = all(m >= mass_target * (1 - 1e-12) for m in masses) and sep >= sep_target
    return ok, masses, sep


def separated_family(X, K, N, r):
    """``K`` subsets of mass ``>= mu(X)/(2NK)``, pairwise ``>= 3r`` apart.

    Hypothesis: every closed ball ``B(x, r)`` has mass at most
    ``mu(X) / (4 N^2 K)``.

    Each step takes, over all remaining points ``x``, the smallest closed
    ball around ``x`` (restricted to the remaining points) reaching the
    target mass, keeping the candidate that removes the least mass. The
    chosen ball becomes ``A_i`` and every remaining point closer than
    ``3r`` to it is discarded. ``K = 1`` returns the whole space.

    Raises
    ------
    HypothesisViolated
        Some ball is too heavy; carries the witness point.
    ConstructionShortfall
        The hypothesis holds but the greedy ran out of mass, or a
        certificate failed; carries the partial family.
    """
    if K < 1 or N < 1 or r <= 0:
        raise InvalidParameter("need K >= 1, N >= 1 and r > 0")
    mu = X.total
    limit = mu / (4 * N * N * K)
    balls = X.ball_masses(r)
    worst = int(np.argmax(balls))
    if balls[worst] > limit * (1 + 1e-12):
        raise HypothesisViolated(
            f"ball around point {worst} has mass {balls[worst]:.6g} > {limit:.6g}",
            witness=worst, mass=float(balls[worst]), limit=limit)
    target = mu / (2 * N * K)
    sep_target = 3 * r

    if K == 1:
        sets = [np.arange(len(X))]
        _, masses, _ = _certify(X, sets, target, sep_target)
        return SeparatedFamily(sets, masses, np.inf, target, sep_target,
                               {"construction": "whole space"})

    D, w = X.distances, X.masses
    remaining = np.ones(len(X), dtype=bool)
    sets = []
    for _ in range(K):
        rem = np.flatnonzero(remaining)
        best = None
        for x in rem:
            d = D[x, rem]
            order = np.argsort(d, kind="stable")
            cum = np.cumsum(w[rem][order])
            hit = np.searchsorted(cum, target * (1 - 1e-12))
            if hit >= len(order):
                continue
            radius = d[order[hit]]
            A = rem[d <= radius]
            near = rem[D[np.ix_(A, rem)].min(axis=0) < sep_target]
            cost = float(w[near].sum())
            if best is None or cost < best[0] - 1e-12:
                best = (cost, A, near)
        if best is None:
            raise ConstructionShortfall(
                f"greedy found {len(sets)} of {K} sets", partial=sets)
        sets.append(best[1])
        remaining[best[2]] = False

    ok, masses, sep = _certify(X, sets, target, sep_target)
    if not ok:
        raise ConstructionShortfall("certificate check failed", partial=sets)
    return SeparatedFamily(sets, masses, sep, target, sep_target,
                           {"construction": "greedy grown balls"})
