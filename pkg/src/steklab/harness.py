"""End-to-end verification runs: shapes in, spectra, invariants and bound reports out.

A run is described by an INI file::

    [run]
    k_max = 8
    samples = 256
    seed = 0
    slack = 1.0

    [shape.disk]
    kind = disk
    h = 0.05

    [shape.bunny]
    kind = custom_file
    path = meshes/bunny.off

Command-line flags override ``[run]`` values. Shapes are processed in
parallel and reassembled in config order, so the report body is a
deterministic function of the config. Wall-clock data lives only in the
``header`` block.
"""

import configparser
import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .bounds import (
    angular_subset,
    bound_cor_berger_croke,
    bound_cor_gny,
    bound_reformulation,
    bound_thm_diam,
    bound_thm_general,
    bound_thm_main,
    concentration_check,
    gm_neighborhood_bound,
    gromov_milman_check,
)
from .eigen import laplace_spectrum, steklov_spectrum
from .errors import ConfigError, MissingInvariant, SteklabError
from .fem import assemble_stiffness
from .metric import compute_invariants
from .shapes import SHAPE_KINDS, ShapeSpec, generate_shape, steklov_domain
from .trial import build_trial_family, certify_sigma_k

__all__ = ["RunConfig", "load_config", "run_verify", "write_outputs",
           "INEQUALITIES", "OUT_ENV"]

OUT_ENV = "STEKLAB_OUT"

INEQUALITIES = (
    "thm_main", "thm_general", "reformulation", "thm_diam",
    "cor_concentration", "prop_gromov_milman", "gm_consequence",
    "trial_certificate", "cor_gny", "cor_berger_croke",
)

# two disjoint arc pairs per shape (degrees, polar angle in the x-y plane)
DEFAULT_ARCS = ((-45.0, 45.0, 135.0, 225.0), (0.0, 60.0, 180.0, 240.0))


@dataclass
class RunConfig:
    shapes: list
    names: list = None
    k_max: int = 8
    certificate_k_max: int = 4
    samples: int = 256
    seed: int = 0
    slack: float = 1.0
    sharp_concentration: bool = False
    inequalities: tuple = INEQUALITIES
    arcs: tuple = DEFAULT_ARCS
    output_dir: str = None
    workers: int = None

    def __post_init__(self):
        if not self.shapes:
            raise ConfigError("at least one shape is required")
        if self.names is None:
            self.names = [s.label() if hasattr(s, "label") else str(s) for s in self.shapes]
        if len(set(self.names)) != len(self.names):
            raise ConfigError("shape names must be unique")
        if int(self.k_max) < 1:
            raise ConfigError("k_max must be at least 1")
        if self.samples < 2:
            raise ConfigError("samples must be at least 2")
        if self.slack < 1:
            raise ConfigError("slack must be at least 1")
        unknown = set(self.inequalities) - set(INEQUALITIES)
        if unknown:
            raise ConfigError(f"unknown inequalities {sorted(unknown)}")
        if self.output_dir is None:
            self.output_dir = os.environ.get(OUT_ENV, "steklab_out")

    def echo(self):
        """Result-relevant settings (no paths or worker counts)."""
        return {
            "shapes": [{"name": n, "kind": s.kind, "parameters": dict(s.parameters),
                        "seed": s.seed} for n, s in zip(self.names, self.shapes)],
            "k_max": self.k_max,
            "certificate_k_max": self.certificate_k_max,
            "samples": self.samples,
            "seed": self.seed,
            "slack": self.slack,
            "sharp_concentration": self.sharp_concentration,
            "inequalities": list(self.inequalities),
            "arcs": [list(a) for a in self.arcs],
        }


def _coerce(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _parse_arcs(text):
    arcs = []
    for chunk in text.split(";"):
        vals = [float(x) for x in chunk.replace(":", ",").split(",") if x.strip()]
        if len(vals) != 4:
            raise ConfigError(f"arc pair needs four angles, got {chunk!r}")
        arcs.append(tuple(vals))
    return tuple(arcs)


def load_config(path, **overrides):
    """Read an INI run description; keyword ``overrides`` that are not None win."""
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    run = parser["run"] if parser.has_section("run") else {}
    shapes, names = [], []
    for section in parser.sections():
        if not section.startswith("shape."):
            continue
        body = dict(parser[section])
        kind = body.pop("kind", None)
        if kind not in SHAPE_KINDS:
            raise ConfigError(f"[{section}] has unknown kind {kind!r}")
        seed = int(body.pop("seed", run.get("seed", 0)))
        params = {k: _coerce(v) for k, v in body.items()}
        if kind == "custom_file":
            params["path"] = body.get("path")
            if params["path"] and not os.path.isabs(params["path"]):
                params["path"] = os.path.join(os.path.dirname(os.path.abspath(path)),
                                              params["path"])
        shapes.append(ShapeSpec(kind, params, seed))
        names.append(section[len("shape."):])
    kw = {}
    try:
        if "k_max" in run:
            kw["k_max"] = int(run["k_max"])
        if "certificate_k_max" in run:
            kw["certificate_k_max"] = int(run["certificate_k_max"])
        if "samples" in run:
            kw["samples"] = int(run["samples"])
        if "seed" in run:
            kw["seed"] = int(run["seed"])
        if "slack" in run:
            kw["slack"] = float(run["slack"])
        if "sharp_concentration" in run:
            kw["sharp_concentration"] = run["sharp_concentration"].strip().lower() in (
                "1", "true", "yes", "on")
        if "inequalities" in run:
            kw["inequalities"] = tuple(x.strip() for x in run["inequalities"].split(",")
                                       if x.strip())
        if "arcs" in run:
            kw["arcs"] = _parse_arcs(run["arcs"])
        if "output_dir" in run:
            kw["output_dir"] = run["output_dir"]
        if "workers" in run:
            kw["workers"] = int(run["workers"])
    except ValueError as exc:
        raise ConfigError(f"bad value in [run]: {exc}") from exc
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(shapes=shapes, names=names, **kw)


# ----------------------------------------------------------------------
# per-shape job

class _Stage:
    """Collects reports and turns module errors into diagnostics."""

    def __init__(self, name):
        self.name = name
        self.reports = []
        self.diagnostics = []

    def run(self, stage, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except MissingInvariant as exc:
            self.diagnostics.append(self._diag(stage, exc, "skipped"))
        except SteklabError as exc:
            self.diagnostics.append(self._diag(stage, exc, "error"))
        except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
            self.diagnostics.append(self._diag(stage, exc, "error"))
        return None

    def _diag(self, stage, exc, level):
        return {"shape": self.name, "stage": stage, "level": level,
                "error": type(exc).__name__, "message": str(exc)}

    def add(self, report, **extra):
        if report is not None:
            d = report.to_dict()
            d.update(extra)
            d["shape"] = self.name
            self.reports.append(d)


def _laplace_checks(st, cfg, mesh, label, component, want):
    """GNY and Berger-Croke bounds on a closed manifold ``mesh``."""
    nev = min(cfg.k_max, mesh.n_vertices - 2)
    spec = st.run(f"laplace:{label}", laplace_spectrum, mesh, nev)
    inv = st.run(f"invariants:{label}", compute_invariants, mesh, cfg.samples, cfg.seed)
    if spec is None or inv is None:
        return None
    n = mesh.dim
    area = mesh.volume
    for k in range(1, nev + 1):
        if "cor_gny" in want:
            st.add(st.run(f"bounds:cor_gny:{label}", bound_cor_gny, spec, area,
                          inv.N_sigma, inv.growth, n, k, cfg.slack),
                   component=component, variant=label)
        if "cor_berger_croke" in want:
            st.add(st.run(f"bounds:cor_berger_croke:{label}", bound_cor_berger_croke,
                          spec, inv.diam_intrinsic[0], inv.inj[0], area, n, k,
                          cfg.slack),
                   component=component, variant=label)
    return {"label": label, "component": component,
            "eigenvalues": [float(x) for x in spec.eigenvalues],
            "residuals": [float(x) for x in spec.residuals],
            "invariants": inv.to_dict()}


def _shape_job(args):
    cfg, index = args
    name, spec = cfg.names[index], cfg.shapes[index]
    want = set(cfg.inequalities)
    st = _Stage(name)
    timing = {}
    out = {"name": name, "kind": spec.kind}

    t0 = time.perf_counter()
    base = st.run("generate", generate_shape, spec)
    if base is None:
        return out, st.reports, st.diagnostics, timing
    mesh = st.run("generate", steklov_domain, spec, base)
    timing["generate"] = time.perf_counter() - t0
    if mesh is None:
        return out, st.reports, st.diagnostics, timing
    out["mesh"] = {"n_vertices": mesh.n_vertices, "n_cells": len(mesh.cells),
                   "dim": mesh.dim, "fingerprint": mesh.fingerprint(),
                   "extruded": not base.has_boundary}

    t0 = time.perf_counter()
    K = assemble_stiffness(mesh)
    spectrum = st.run("spectrum", steklov_spectrum, mesh, cfg.k_max, K=K,
                      rng=np.random.default_rng([cfg.seed, 0x5354]))
    timing["spectrum"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    inv = st.run("invariants", compute_invariants, mesh, cfg.samples, cfg.seed)
    timing["invariants"] = time.perf_counter() - t0
    if spectrum is None or inv is None:
        return out, st.reports, st.diagnostics, timing
    out["spectrum"] = spectrum.to_dict()
    out["invariants"] = inv.to_dict()

    t0 = time.perf_counter()
    for k in range(1, cfg.k_max + 1):
        if "thm_main" in want:
            st.add(st.run("bounds:thm_main", bound_thm_main, spectrum, inv, k, cfg.slack))
        if "reformulation" in want:
            st.add(st.run("bounds:reformulation", bound_reformulation, spectrum, inv, k,
                          cfg.slack))
        for j in range(inv.b):
            if "thm_general" in want:
                st.add(st.run("bounds:thm_general", bound_thm_general, spectrum, inv, j, k,
                              cfg.slack))
            if "thm_diam" in want:
                st.add(st.run("bounds:thm_diam", bound_thm_diam, spectrum, inv, j, k,
                              cfg.slack))
            if "cor_concentration" in want:
                st.add(st.run("bounds:cor_concentration", concentration_check, spectrum,
                              inv, j, k, False, cfg.slack))
                if cfg.sharp_concentration:
                    st.add(st.run("bounds:cor_concentration", concentration_check,
                                  spectrum, inv, j, k, True, cfg.slack))

    if "prop_gromov_milman" in want or "gm_consequence" in want:
        for p, (a0, a1, b0, b1) in enumerate(cfg.arcs):
            A = angular_subset(mesh, math.radians(a0), math.radians(a1))
            B = angular_subset(mesh, math.radians(b0), math.radians(b1))
            if "prop_gromov_milman" in want:
                st.add(st.run("bounds:prop_gromov_milman", gromov_milman_check, mesh,
                              spectrum, A, B, cfg.slack), variant=f"arcs{p}")
            if "gm_consequence" in want:
                rho = 0.5 * inv.diam_extrinsic_global
                st.add(st.run("bounds:gm_consequence", gm_neighborhood_bound, mesh,
                              spectrum, A, rho), variant=f"arcs{p}")

    if "trial_certificate" in want:
        for k in range(1, min(cfg.k_max, cfg.certificate_k_max) + 1):
            fam = st.run("trial_family", build_trial_family, mesh, 0, k, "diam_proof",
                         K=K, delta=inv.diam_extrinsic[0], seed=cfg.seed)
            if fam is not None:
                st.add(st.run("bounds:trial_certificate", certify_sigma_k, spectrum, fam,
                              mesh, K), component=0)
    timing["bounds"] = time.perf_counter() - t0

    if want & {"cor_gny", "cor_berger_croke"}:
        t0 = time.perf_counter()
        laplace = []
        if not base.has_boundary:
            laplace.append(_laplace_checks(st, cfg, base, "closed_shape", None, want))
        else:
            for j in range(base.n_components):
                sub, _ = base.boundary_submesh(j)
                laplace.append(_laplace_checks(st, cfg, sub, f"boundary{j}", j, want))
        out["laplace"] = [x for x in laplace if x is not None]
        timing["laplace"] = time.perf_counter() - t0
    return out, st.reports, st.diagnostics, timing


# ----------------------------------------------------------------------

def _summary(reports, diagnostics):
    counts = {s: 0 for s in ("pass", "inconclusive", "fail", "vacuous")}
    for r in reports:
        counts[r["status"]] += 1
    total = len(reports)
    errors = sum(d["level"] == "error" for d in diagnostics)
    if errors:
        code = 1
    elif counts["fail"]:
        code = 2
    else:
        code = 0
    nonvac = total - counts["vacuous"]
    return {
        "total": total,
        **counts,
        "inconclusive_fraction": counts["inconclusive"] / nonvac if nonvac else 0.0,
        "errors": errors,
        "skipped": sum(d["level"] == "skipped" for d in diagnostics),
        "exit_code": code,
    }


def run_verify(config):
    """Run every configured check; returns the report dict (not yet written).

    ``report["summary"]["exit_code"]`` is 0 when nothing failed, 2 on a hard
    failure and 1 when some stage raised.
    """
    started = time.perf_counter()
    jobs = [(config, i) for i in range(len(config.shapes))]
    workers = config.workers or os.cpu_count() or 1
    workers = max(1, min(workers, len(jobs)))
    if workers == 1:
        results = [_shape_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_shape_job, jobs))
    shapes, reports, diags, timing = [], [], [], {}
    for out, reps, dg, tm in results:
        shapes.append(out)
        reports.extend(reps)
        diags.extend(dg)
        timing[out["name"]] = tm
    return {
        "header": {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "elapsed_seconds": time.perf_counter() - started,
            "timing": timing,
            "workers": workers,
            "output_dir": os.path.abspath(config.output_dir),
        },
        "code_version": __version__,
        "config": config.echo(),
        "shapes": shapes,
        "bounds": reports,
        "diagnostics": diags,
        "summary": _summary(reports, diags),
    }


CSV_COLUMNS = ("shape", "inequality_id", "k", "component", "variant", "lhs", "rhs",
               "slack", "pass", "status")


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def write_outputs(report, output_dir):
    """Write ``report.json`` and ``bounds.csv``; returns their paths."""
    os.makedirs(output_dir, exist_ok=True)
    jpath = os.path.join(output_dir, "report.json")
    cpath = os.path.join(output_dir, "bounds.csv")
    with open(jpath, "w") as fh:
        json.dump(_clean(report), fh, indent=1, sort_keys=True)
        fh.write("\n")
    with open(cpath, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in report["bounds"]:
            w.writerow([r.get(c) for c in CSV_COLUMNS])
    return jpath, cpath


def body_without_header(report):
    """Everything that must be reproducible across runs."""
    return {k: v for k, v in report.items() if k != "header"}
