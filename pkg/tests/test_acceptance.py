"""Acceptance criteria 1-11, one test each; a pass/fail line per criterion is printed."""

import json
import math
import time
from types import SimpleNamespace

import numpy as np
import pytest

from steklab.analytic import annulus_steklov, disk_steklov
from steklab.bounds import (
    K_const,
    K_const_forms,
    bound_cor_berger_croke,
    bound_cor_gny,
    cylinder_sigma_from_lambda,
    gamma_const,
)
from steklab.eigen import laplace_spectrum, steklov_spectrum
from steklab.errors import HypothesisViolated
from steklab.harness import RunConfig, body_without_header, run_verify
from steklab.metric import compute_invariants, packing_constant
from steklab.separated import FiniteMetricMeasureSpace, separated_family
from steklab.shapes import GENERATOR_SHAPES, ShapeSpec, generate_shape, steklov_domain
from steklab.trial import build_trial_family, certify_sigma_k, eigenvector_family

# frozen from exact symbolic roots of the per-mode quadratics, radii (0.5, 1)
ANNULUS_NONZERO = [0.4384471871911697, 0.4384471871911697, 1.5132037735886792,
                   1.5132037735886792, 2.7570887453651305]

SUITE_REQUIRED = ("thm_main", "thm_general", "reformulation", "thm_diam",
                  "cor_concentration", "prop_gromov_milman")


@pytest.fixture(scope="module")
def domains():
    return {kind: steklov_domain(ShapeSpec(kind)) for kind in GENERATOR_SHAPES}


@pytest.fixture(scope="module")
def suite_report():
    cfg = RunConfig([ShapeSpec(k) for k in GENERATOR_SHAPES], k_max=8, workers=1,
                    output_dir="unused")
    return run_verify(cfg)


def test_criterion_01_disk(record_criterion):
    t0 = time.perf_counter()
    mesh = generate_shape(ShapeSpec("disk", {"h": 0.05}))
    vals = steklov_spectrum(mesh, 6).eigenvalues
    elapsed = time.perf_counter() - t0
    ref = disk_steklov(7)
    err = np.abs(vals[1:] - ref[1:]) / ref[1:]
    ok = abs(vals[0]) < 1e-6 and err.max() <= 0.02 and elapsed <= 60
    record_criterion(1, ok, f"max rel err {err.max():.2e}, sigma_0 {vals[0]:.1e}, {elapsed:.1f} s")
    assert ok


def test_criterion_02_annulus(record_criterion):
    assert np.allclose(annulus_steklov(6)[1:], ANNULUS_NONZERO, rtol=1e-12)
    mesh = generate_shape(ShapeSpec("annulus", {"h": 0.05}))
    vals = steklov_spectrum(mesh, 5).eigenvalues[1:]
    err = np.abs(vals - ANNULUS_NONZERO) / ANNULUS_NONZERO
    ok = err.max() <= 0.02
    record_criterion(2, ok, f"max rel err {err.max():.2e}")
    assert ok


def test_criterion_03_cylinder(record_criterion):
    # the tanh branch is evaluated at the half-length, see the cylinder note in the README;
    # the full-length reading is reported alongside for comparison
    L = 0.1
    mesh = generate_shape(ShapeSpec("flat_cylinder", {"L": L, "h": 0.02}))
    vals = steklov_spectrum(mesh, 4).eigenvalues[1:]
    ref = np.array([cylinder_sigma_from_lambda(m * m, L / 2) for m in (1, 1, 2, 2)])
    err = np.abs(vals - ref) / ref
    full = np.array([cylinder_sigma_from_lambda(m * m, L) for m in (1, 1, 2, 2)])
    ok = err.max() <= 0.03
    record_criterion(3, ok, f"max rel err {err.max():.2e} (full-length reading "
                            f"{np.max(np.abs(vals - full) / full):.2e})")
    assert ok


def test_criterion_04_scaling(record_criterion, domains):
    worst = 0.0
    for kind, mesh in domains.items():
        base = steklov_spectrum(mesh, 8).eigenvalues[1:]
        for t in (0.5, 2.0):
            scaled = steklov_spectrum(mesh.scaled(t), 8).eigenvalues[1:] * t
            worst = max(worst, float(np.max(np.abs(scaled - base) / base)))
    ok = worst <= 1e-9
    record_criterion(4, ok, f"max rel deviation {worst:.2e} over {len(domains)} shapes")
    assert ok


def test_criterion_05_inequality_suite(record_criterion, suite_report):
    rows = [r for r in suite_report["bounds"] if r["inequality_id"] in SUITE_REQUIRED]
    fails = [r for r in rows if r["status"] == "fail"]
    inconclusive = sum(r["status"] == "inconclusive" for r in rows)
    shapes = {r["shape"] for r in rows}
    gm_pairs = {(r["shape"], r["variant"]) for r in rows
                if r["inequality_id"] == "prop_gromov_milman"}
    ks = {r["k"] for r in rows if r["inequality_id"] == "thm_main"}
    errors = [d for d in suite_report["diagnostics"] if d["level"] == "error"]
    frac = inconclusive / len(rows)
    ok = (not fails and not errors and frac <= 0.05 and shapes == set(GENERATOR_SHAPES)
          and len(gm_pairs) == 2 * len(GENERATOR_SHAPES) and ks == set(range(1, 9))
          and all(r["status"] in ("pass", "inconclusive") for r in rows))
    record_criterion(5, ok, f"{len(rows)} checks, {len(fails)} fail, "
                            f"{inconclusive} inconclusive ({frac:.1%}), {len(errors)} errors")
    assert ok


def _closed_checks(mesh, k_max=4):
    spec = laplace_spectrum(mesh, k_max)
    inv = compute_invariants(mesh)
    return spec, inv


def test_criterion_06_gny(record_criterion):
    slacks, statuses = {}, []
    for length in (2 * math.pi, 10.0, 100.0):
        mesh = generate_shape(ShapeSpec("circle", {"length": length, "segments": 256}))
        spec, inv = _closed_checks(mesh)
        reps = [bound_cor_gny(spec, mesh.volume, inv.N_sigma, inv.growth, 1, k)
                for k in range(1, 5)]
        statuses += [r.status for r in reps]
        slacks[length] = [r.slack for r in reps]
    for L1 in (2 * math.pi, 10.0):
        mesh = generate_shape(ShapeSpec("product_torus", {"L1": L1, "L2": 2 * math.pi}))
        spec, inv = _closed_checks(mesh)
        statuses += [bound_cor_gny(spec, mesh.volume, inv.N_sigma, inv.growth, 2, k).status
                     for k in range(1, 5)]
    base = np.array(slacks[2 * math.pi])
    spread = max(float(np.max(np.abs(np.array(s) / base - 1))) for s in slacks.values())
    ok = all(s == "pass" for s in statuses) and spread <= 0.01
    record_criterion(6, ok, f"{len(statuses)} checks pass, circle slack spread {spread:.1e}, "
                            f"slack(k=1) {base[0]:.4g}")
    assert ok


def test_criterion_07_berger_croke(record_criterion):
    bounds, statuses = [], []
    for L in (10.0, 20.0, 40.0):
        mesh = generate_shape(ShapeSpec("product_torus", {"L1": L, "L2": 2 * math.pi}))
        spec, inv = _closed_checks(mesh, 2)
        r = bound_cor_berger_croke(spec, inv.diam_intrinsic[0], inv.inj[0], mesh.volume,
                                   2, 1)
        statuses.append(r.status)
        bounds.append(r.constants_used["lambda_bound"])
    ok = all(s == "pass" for s in statuses) and bounds[0] > bounds[1] > bounds[2]
    record_criterion(7, ok, "lambda_1 bounds " + ", ".join(f"{b:.4g}" for b in bounds))
    assert ok


def _random_space(seed):
    rng = np.random.default_rng([seed, 8])
    kind = ("circle", "grid", "clusters")[seed % 3]
    m = int(rng.integers(200, 400))
    masses = rng.uniform(0.8, 1.2, m)
    if kind == "circle":
        length = rng.uniform(10, 1000)
        t = (np.arange(m) + rng.uniform(-0.3, 0.3, m)) * length / m
        d = np.abs(t[:, None] - t[None, :])
        return FiniteMetricMeasureSpace(np.minimum(d, length - d), masses), rng
    if kind == "grid":
        dim = 1 if seed % 2 else 2
        side = m if dim == 1 else int(math.isqrt(m))
        g = np.stack(np.meshgrid(*[np.arange(side)] * dim), -1).reshape(-1, dim).astype(float)
        return FiniteMetricMeasureSpace.from_points(
            g + rng.uniform(-0.2, 0.2, g.shape), masses[:len(g)]), rng
    gap = rng.uniform(5, 50)
    x = np.concatenate([rng.uniform(0, 10, m // 2), rng.uniform(10 + gap, 20 + gap, m - m // 2)])
    return FiniteMetricMeasureSpace.from_points(x, masses), rng


def test_criterion_08_separated_family(record_criterion):
    verified = violated = bad = 0
    atom_ok = 0
    for seed in range(100):
        X, rng = _random_space(seed)
        K = int(rng.integers(2, 5))
        D = X.distances
        pos = D[D > 0]
        N = packing_constant(SimpleNamespace(dist=D), np.geomspace(pos.min(), pos.max(), 8))
        limit = X.total / (4 * N * N * K)
        good = [r for r in np.geomspace(pos.min() / 2, pos.max(), 40)
                if X.ball_masses(r).max() <= limit]
        if good:
            r = good[-1]
            fam = separated_family(X, K, N, r)
            masses = [X.masses[A].sum() for A in fam.sets]
            seps = [D[np.ix_(a, b)].min() for i, a in enumerate(fam.sets)
                    for b in fam.sets[i + 1:]]
            if (len(fam) == K and min(masses) >= X.total / (2 * N * K) * (1 - 1e-12)
                    and min(seps) >= 3 * r):
                verified += 1
            else:
                bad += 1
        else:
            with pytest.raises(HypothesisViolated):
                separated_family(X, K, N, pos.min() / 2)
            violated += 1
        # atom-heavy counter-instance: one point carries half the mass
        heavy = FiniteMetricMeasureSpace(D, np.where(np.arange(len(X)) == 0, X.total, X.masses))
        try:
            separated_family(heavy, K, N, pos.min() / 2)
        except HypothesisViolated as exc:
            atom_ok += exc.witness is not None
    ok = bad == 0 and atom_ok == 100 and verified >= 50
    record_criterion(8, ok, f"{verified} certified, {violated} hypothesis violated, "
                            f"{bad} bad, {atom_ok}/100 atom instances rejected")
    assert ok


def test_criterion_09_certificates(record_criterion, domains):
    worst_gap, worst_tight, failures = math.inf, 0.0, []
    for kind, mesh in domains.items():
        spec = steklov_spectrum(mesh, 4)
        inv = compute_invariants(mesh)
        for k in range(1, 5):
            fam = build_trial_family(mesh, 0, k, "diam_proof", delta=inv.diam_extrinsic[0])
            r = certify_sigma_k(spec, fam, mesh)
            worst_gap = min(worst_gap, r.rhs / r.lhs)
            if r.status != "pass":
                failures.append((kind, k))
            e = certify_sigma_k(spec, eigenvector_family(mesh, spec, k), mesh)
            worst_tight = max(worst_tight, abs(e.rhs - spec[k]) / spec[k])
    ok = not failures and worst_tight <= 1e-8
    record_criterion(9, ok, f"min rhs/sigma_k {worst_gap:.3g}, eigenvector gap {worst_tight:.1e}")
    assert ok


def test_criterion_10_constants(record_criterion):
    gaps = [abs(a - b) / abs(a) for a, b in map(K_const_forms, range(1, 7))]
    vals = (K_const(1), gamma_const(1), gamma_const(2))
    ok = (max(gaps) <= 1e-12 and vals[0] == pytest.approx(4096, rel=1e-15)
          and vals[1] == pytest.approx(2, rel=1e-15)
          and vals[2] == pytest.approx(math.pi / 2, rel=1e-15))
    record_criterion(10, ok, f"max form gap {max(gaps):.1e}, K(1)={vals[0]:.15g}, "
                             f"gamma(1)={vals[1]:.15g}, gamma(2)={vals[2]:.15g}")
    assert ok


def test_criterion_11_determinism(record_criterion, suite_report, tmp_path):
    cfg = RunConfig([ShapeSpec(k) for k in GENERATOR_SHAPES], k_max=8, workers=3,
                    output_dir="unused")
    again = run_verify(cfg)
    a = json.dumps(body_without_header(suite_report), sort_keys=True)
    b = json.dumps(body_without_header(again), sort_keys=True)
    ok = a == b
    record_criterion(11, ok, f"{len(a)} bytes compared, workers 1 vs 3")
    assert ok
