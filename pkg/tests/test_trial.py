import math

import numpy as np
import pytest

from steklab.eigen import steklov_spectrum
from steklab.errors import InvalidParameter, NotEnoughFunctions, SeparationInfeasible
from steklab.fem import lumped_boundary_weights
from steklab.metric import compute_invariants
from steklab.shapes import ShapeSpec, generate_shape
from steklab.trial import (
    TrialFamily,
    build_trial_family,
    cell_disjoint,
    certify_sigma_k,
    eigenvector_family,
)


@pytest.fixture(scope="module")
def disk_family(disk):
    return build_trial_family(disk, 0, 1)


def test_disk_centers_are_separated(disk, disk_family):
    P = disk.vertices[disk_family.centers]
    D = np.linalg.norm(P[:, None] - P[None], axis=2)
    assert len(disk_family) == 2
    assert disk_family.meta["separation"] >= disk_family.meta["delta"] / 4
    assert D[~np.eye(2, dtype=bool)].min() >= 0.5 - 1e-9
    assert disk_family.meta["cell_disjoint"]
    assert cell_disjoint(disk, disk_family.functions)


def test_values_and_plateaus(disk, disk_family):
    F = disk_family.functions
    assert F.min() >= 0 and F.max() <= 1
    for i, c in enumerate(disk_family.centers):
        assert F[c, i] == 1.0


def test_quotient_below_proof_majorant(disk, disk_family):
    # energy <= slope^2 |support|, boundary norm >= measure of the plateau on the boundary
    w = lumped_boundary_weights(disk)
    slope = 1 / (disk_family.meta["outer"] - disk_family.meta["inner"])
    for i in range(len(disk_family)):
        f = disk_family.functions[:, i]
        plateau = float(w[f == 1.0].sum())
        bound = slope ** 2 * disk_family.meta["support_volumes"][i] / plateau
        assert disk_family.rayleigh_quotients[i] <= bound


def test_disk_certificate(disk, disk_family):
    spec = steklov_spectrum(disk, 1)
    r = certify_sigma_k(spec, disk_family, disk)
    assert r.status == "pass"
    assert r.rhs == r.constants_used["max_rayleigh"]
    assert r.constants_used["span_max"] <= r.rhs * (1 + 1e-9)
    assert 1 < r.rhs < 500


def test_eigenvector_certificate_is_tight(annulus):
    spec = steklov_spectrum(annulus, 4)
    for k in range(1, 5):
        r = certify_sigma_k(spec, eigenvector_family(annulus, spec, k), annulus)
        assert r.rhs == pytest.approx(spec[k], rel=1e-8)


def test_not_enough_functions(disk, disk_family):
    spec = steklov_spectrum(disk, 2)
    one = TrialFamily(1, disk_family.functions[:, :1], [], 0.0,
                      disk_family.rayleigh_quotients[:1])
    with pytest.raises(NotEnoughFunctions):
        certify_sigma_k(spec, one, disk)


def test_infeasible_separation(disk):
    with pytest.raises(SeparationInfeasible):
        build_trial_family(disk, 0, 1, delta=50.0)


def test_bad_flavor_and_k(disk):
    with pytest.raises(InvalidParameter):
        build_trial_family(disk, 0, 0)
    with pytest.raises(InvalidParameter):
        build_trial_family(disk, 0, 1, flavor="nope")


def test_general_proof_needs_fine_boundary(annulus):
    # a boundary vertex heavier than mu/(4 N^2 K) is an atom the hypothesis forbids
    inv = compute_invariants(annulus, samples=64)
    with pytest.raises(SeparationInfeasible):
        build_trial_family(annulus, 0, 1, "general_proof", invariants=inv)
    with pytest.raises(InvalidParameter):
        build_trial_family(annulus, 0, 1, "general_proof")


def test_general_proof_family():
    mesh = generate_shape(ShapeSpec("disk", {"h": 0.015}))
    inv = compute_invariants(mesh, samples=32)
    spec = steklov_spectrum(mesh, 1)
    fam = build_trial_family(mesh, 0, 1, "general_proof", invariants=inv)
    assert len(fam) == 2
    assert fam.meta["separation"] >= 3 * fam.meta["r"] * (1 - 1e-12)
    assert min(fam.meta["set_masses"]) >= 2 * math.pi / (2 * fam.meta["N"] * 4) * (1 - 1e-9)
    assert np.all((fam.functions >= 0) & (fam.functions <= 1))
    assert certify_sigma_k(spec, fam, mesh).status == "pass"
