import math

import numpy as np
import pytest

from steklab.analytic import (
    annulus_determinant,
    annulus_steklov,
    circle_laplace,
    cylinder_steklov,
    disk_steklov,
    sphere_laplace,
    torus_laplace,
)

# roots of each mode's quadratic in sigma, r_in = 0.5, r_out = 1 (sympy, exact arithmetic)
ANNULUS_ORACLE = [0.0, 0.4384471871911697, 0.4384471871911697,
                  1.5132037735886792, 1.5132037735886792, 2.7570887453651305]
ANNULUS_M4 = 3.910023396769969
ANNULUS_M0 = 4.328085122666891


def test_disk_values():
    assert list(disk_steklov(7)) == [0, 1, 1, 2, 2, 3, 3]
    assert disk_steklov(3, radius=2.0)[1] == 0.5


def test_annulus_matches_symbolic_roots():
    vals = annulus_steklov(10)
    assert np.allclose(vals[:6], ANNULUS_ORACLE, rtol=1e-12, atol=1e-14)
    assert ANNULUS_M4 == pytest.approx(vals[8], rel=1e-12)
    assert np.min(np.abs(annulus_steklov(12) - ANNULUS_M0)) < 1e-12


def test_annulus_determinant_vanishes_at_roots():
    assert abs(annulus_determinant(ANNULUS_ORACLE[1], 1, 0.5, 1.0)) < 1e-12
    assert abs(annulus_determinant(ANNULUS_M0, 0, 0.5, 1.0)) < 1e-12


def test_cylinder_branches():
    lam = circle_laplace(5, 2 * math.pi)
    vals = cylinder_steklov(lam, 0.1, 4)
    assert vals[0] == 0
    assert vals[1] == pytest.approx(math.tanh(0.05), rel=1e-14)


def test_torus_and_sphere():
    assert list(torus_laplace(5, 2 * math.pi, 2 * math.pi)) == [0, 1, 1, 1, 1]
    assert list(sphere_laplace(4)) == [0, 2, 2, 2]
