"""Closed-form and semi-analytic spectra used as independent fixtures.

None of these touch the mesh or the finite element path.
"""

import math

import numpy as np
from scipy.optimize import bisect

__all__ = [
    "disk_steklov",
    "annulus_steklov",
    "annulus_determinant",
    "cylinder_steklov",
    "circle_laplace",
    "torus_laplace",
    "sphere_laplace",
]


def _expand(pairs, count):
    """Flatten (value, multiplicity) pairs, sort, and keep ``count`` values."""
    vals = sorted(v for v, mult in pairs for _ in range(mult))
    return np.array(vals[:count])


def disk_steklov(count, radius=1.0):
    """Steklov eigenvalues ``m / radius`` of a disk, multiplicity two for m >= 1."""
    pairs = [(0.0, 1)] + [(m / radius, 2) for m in range(1, count)]
    return _expand(pairs, count)


def annulus_determinant(sigma, m, r_in, r_out):
    """Determinant of the 2x2 Steklov system for Fourier mode ``m``.

    Basis ``r^m, r^-m`` for m >= 1 and ``1, log r`` for m = 0; the outward
    normal is ``+d/dr`` on the outer circle and ``-d/dr`` on the inner one.
    """
    a, b = r_in, r_out
    if m == 0:
        row_out = (-sigma, 1.0 / b - sigma * math.log(b))
        row_in = (-sigma, -1.0 / a - sigma * math.log(a))
    else:
        row_out = (m * b ** (m - 1) - sigma * b ** m,
                   -m * b ** (-m - 1) - sigma * b ** (-m))
        row_in = (-m * a ** (m - 1) - sigma * a ** m,
                  m * a ** (-m - 1) - sigma * a ** (-m))
    return row_out[0] * row_in[1] - row_out[1] * row_in[0]


def _roots_by_bisection(f, upper, grid=4000):
    xs = np.linspace(0.0, upper, grid + 1)
    fs = np.array([f(x) for x in xs])
    roots = []
    for x0, x1, f0, f1 in zip(xs[:-1], xs[1:], fs[:-1], fs[1:]):
        if f0 == 0.0:
            roots.append(float(x0))
        elif f0 * f1 < 0:
            roots.append(bisect(f, x0, x1, xtol=1e-14, rtol=1e-15, maxiter=200))
    return roots


def annulus_steklov(count, r_in=0.5, r_out=1.0, m_max=None):
    """Lowest ``count`` Steklov eigenvalues of the annulus ``r_in < r < r_out``.

    Roots of each mode's determinant are bracketed on a grid and refined by
    bisection; modes m >= 1 carry multiplicity two.
    """
    m_max = count + 2 if m_max is None else m_max
    upper = 4.0 * (m_max + 2) / r_in
    pairs = [(0.0, 1)]
    for m in range(0, m_max + 1):
        roots = _roots_by_bisection(
            lambda s: annulus_determinant(s, m, r_in, r_out), upper)
        if m == 0:
            roots = [r for r in roots if r > 1e-12]
        pairs.extend((r, 1 if m == 0 else 2) for r in roots)
    return _expand(pairs, count)


def cylinder_steklov(laplace_eigs, length, count):
    """Steklov spectrum of ``[0, length] x Sigma`` from the Laplace spectrum of Sigma.

    Each Laplace eigenvalue ``lam`` contributes ``sqrt(lam) tanh(sqrt(lam) L/2)``
    and ``sqrt(lam) coth(sqrt(lam) L/2)``; ``lam = 0`` contributes 0 and 2/L.
    """
    vals = []
    for lam in laplace_eigs:
        if lam <= 0:
            vals.extend([0.0, 2.0 / length])
        else:
            c = math.sqrt(lam)
            vals.append(c * math.tanh(c * length / 2))
            vals.append(c / math.tanh(c * length / 2))
    return np.sort(vals)[:count]


def circle_laplace(count, length):
    pairs = [(0.0, 1)] + [((2 * math.pi * m / length) ** 2, 2) for m in range(1, count)]
    return _expand(pairs, count)


def torus_laplace(count, L1, L2, modes=12):
    vals = [(2 * math.pi * p / L1) ** 2 + (2 * math.pi * q / L2) ** 2
            for p in range(-modes, modes + 1) for q in range(-modes, modes + 1)]
    return np.sort(vals)[:count]


def sphere_laplace(count, radius=1.0):
    pairs = [(l * (l + 1) / radius ** 2, 2 * l + 1) for l in range(count)]
    return _expand(pairs, count)
