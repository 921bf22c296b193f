"""Cross-check every closed form against numerical evolution, plus invariants."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import analytic
from .channels import (
    kraus_measure_prepare,
    kraus_protocol1,
    kraus_protocol2,
    kraus_teleport,
    perturbed,
)
from .params import InputParams, SwitchParams
from .protocols import ProtocolRun, classical_mixture_grid, pointwise, run
from .qmat import projector, tensor
from .states import bell
from .sweep import SweepConfig, flat_grid, grid_axes, numeric_values, protocol_kraus_sets

IDENTITY_TOL = 1e-12
ANNIHILATION_TOL = 1e-14
SEED = 20240601


@dataclass
class Check:
    name: str
    status: str  # pass | fail | skipped
    worst: float | None = None
    tolerance: float | None = None
    detail: str = ""


def _bound(name, worst, tol, detail=""):
    worst = float(worst)
    ok = math.isfinite(worst) and worst <= tol
    return Check(name, "pass" if ok else "fail", worst, tol, detail)


def _floor(name, values, floor, strict=False, detail=""):
    low = float(np.min(values))
    ok = low > floor if strict else low >= floor - IDENTITY_TOL
    # report the shortfall below the floor as "worst"
    return Check(name, "pass" if ok else "fail", max(0.0, floor - low), 0.0,
                 detail or f"min={low:.15g}")


def _random_inputs(rng, n):
    # uniform on the sphere
    return np.arccos(rng.uniform(-1, 1, n)), rng.uniform(0, 2 * np.pi, n)


def kraus_checks(protocols, perturb: float = 0.0) -> list[Check]:
    teleport = kraus_teleport()
    if perturb:
        teleport = perturbed(teleport, perturb)
    sets = {}
    if 1 in protocols:
        sets["teleport"] = teleport
        sets["protocol1"] = kraus_protocol1(teleport)
    if 2 in protocols:
        sets["measure_prepare"] = kraus_measure_prepare()
        sets["protocol2"] = kraus_protocol2(teleport, kraus_measure_prepare())
    return [_bound(f"completeness[{name}]", ks.residual(), IDENTITY_TOL) for name, ks in sets.items()]


def annihilation_check(n=1000, seed=SEED) -> Check:
    rng = np.random.default_rng(seed)
    tp, pp = _random_inputs(rng, n)
    ops = kraus_measure_prepare().ops[4:]
    singlet = bell("psi-")
    worst = 0.0
    for t, p in zip(tp, pp):
        q = np.array([[math.cos(t / 2)], [np.exp(1j * p) * math.sin(t / 2)]])
        rho = projector(tensor(q, singlet))
        worst = max(worst, float(np.abs(ops @ rho @ ops.conj().transpose(0, 2, 1)).max()))
    return _bound("completion_terms_annihilate", worst, ANNIHILATION_TOL)


def baseline_check(kraus_sets, n=100, seed=SEED) -> Check:
    rng = np.random.default_rng(seed)
    tp, pp = _random_inputs(rng, n)
    kraus = None if kraus_sets is None else kraus_sets[1]
    worst = 0.0
    for t, p in zip(tp, pp):
        r = run(ProtocolRun(1, 1, None, SwitchParams(0.0, 0.0), InputParams(t, p)), kraus)
        worst = max(worst, abs(r.fidelity - 1.0))
    return _bound("perfect_teleportation_baseline", worst, IDENTITY_TOL)


def run_verification(config: SweepConfig | None = None) -> dict:
    """Run every check on the configured grid and return a JSON-ready summary."""
    config = config or SweepConfig()
    start = time.perf_counter()
    kraus_sets = protocol_kraus_sets(config.perturb)
    protocols = set(config.protocols)
    checks: list[Check] = []

    checks += kraus_checks(protocols, config.perturb)
    if 2 in protocols:
        checks.append(annihilation_check())
    if 1 in protocols:
        checks.append(baseline_check(kraus_sets))

    theta, phi = flat_grid(config)
    ana = analytic.grid_values(theta, phi)
    num = numeric_values(theta, phi, tuple(sorted(protocols)), kraus_sets)

    for col in replace(config, outputs=None).value_columns():
        err = np.abs(num[col] - ana[col])
        checks.append(_bound(f"analytic_vs_numeric[{col}]", err.max(), config.tolerance))

    checks += _identity_checks(theta, phi, ana, protocols)
    checks += _invariant_checks(config, theta, phi, num, protocols, kraus_sets)

    for p in (1, 2):
        if p not in protocols:
            checks.append(Check(f"protocol{p}", "skipped", detail="excluded by --protocol"))

    failed = [c.name for c in checks if c.status == "fail"]
    return {
        "passed": not failed,
        "failed": failed,
        "grid": [config.theta_points, config.phi_points],
        "protocols": sorted(protocols),
        "tolerance": config.tolerance,
        "perturb": config.perturb,
        "seconds": round(time.perf_counter() - start, 3),
        "checks": [asdict(c) for c in checks],
    }


def _identity_checks(theta, phi, ana, protocols) -> list[Check]:
    """Closed-form chains: d_i == Delta_i(sin theta) == G_i(c_z, c_x, region)."""
    checks = []
    first = theta <= math.pi / 2
    c_z, c_x = ana["c_z"], ana["c_x"]
    inner = (phi >= math.pi / 2) & (phi <= 3 * math.pi / 2)
    for p, d, delta, g in ((1, ana["d1"], analytic.delta1, analytic.g1_branch),
                           (2, ana["d2"], analytic.delta2, analytic.g2_branch)):
        if p not in protocols:
            continue
        via_delta = np.where(first, delta(c_z, phi, "first"), delta(c_z, phi, "second"))
        via_g = np.empty_like(d)
        for th, ph in (("first", "inner"), ("first", "outer"), ("second", "inner"), ("second", "outer")):
            mask = (first if th == "first" else ~first) & (inner if ph == "inner" else ~inner)
            if mask.any():
                via_g[mask] = g(c_z[mask], c_x[mask], analytic.Region(th, ph))
        worst = max(np.abs(d - via_delta).max(), np.abs(d - via_g).max())
        checks.append(_bound(f"coherence_chain[{p}]", worst, IDENTITY_TOL))
    return checks


def _invariant_checks(config, theta, phi, num, protocols, kraus_sets) -> list[Check]:
    checks = []
    rng = np.random.default_rng(SEED)
    n = 1000
    st = np.arccos(rng.uniform(-1, 1, n))
    sp = rng.uniform(0, 2 * np.pi, n)
    tp, pp = _random_inputs(rng, n)
    thetas, _ = grid_axes(config)

    for p in sorted(protocols):
        kraus = None if kraus_sets is None else kraus_sets[p]
        tag = f"p{p}"
        checks.append(_floor(f"nonnegative[d{p}max]", num[f"d{p}max"], 0.0))

        f_off, p_off = pointwise(p, "off", st, sp, tp, pp, kraus)
        f_on, _ = pointwise(p, "on", st, np.mod(sp + np.pi, 2 * np.pi), tp, pp, kraus)
        checks.append(_bound(f"swap_symmetry[{p}]", np.abs(f_off - f_on).max(), IDENTITY_TOL))

        _, p_on = pointwise(p, "on", st, sp, tp, pp, kraus)
        checks.append(_bound(f"total_probability[{p}]", np.abs(p_on + p_off - 1).max(), IDENTITY_TOL))

        mix = classical_mixture_grid(p, thetas, kraus)
        path1 = num[f"f_{tag}pa1"].reshape(config.theta_points, config.phi_points)
        checks.append(_bound(f"classical_mixture[{p}]", np.abs(path1 - mix[:, None]).max(), IDENTITY_TOL))

    if 1 in protocols:
        kraus = None if kraus_sets is None else kraus_sets[1]
        checks.append(_floor("floor[f_p1pa1>=1/2]", num["f_p1pa1"], 0.5))
        spread = 0.0
        for branch in ("trace", "on", "off"):
            for t0, p0 in ((0.7, 0.3), (math.pi / 2, math.pi), (2.5, 4.0)):
                f, _ = pointwise(1, branch, t0, p0, tp, pp, kraus)
                spread = max(spread, float(np.ptp(f)))
        checks.append(_bound("input_independence[1]", spread, IDENTITY_TOL))
        # threshold: f_p1pa1 > 2/3 exactly below theta*
        theta_star = analytic.classical_threshold_pr1pa1()
        above = num["f_p1pa1"] > 2 / 3
        away = np.abs(theta - theta_star) > 1e-9
        mismatch = np.count_nonzero((above != (theta < theta_star)) & away)
        checks.append(Check("threshold[f_p1pa1>2/3 iff theta<theta*]", "pass" if mismatch == 0 else "fail",
                            float(mismatch), 0.0, f"theta*={math.degrees(theta_star):.4f} deg"))
    if 2 in protocols:
        checks.append(_floor("floor[f_p2pa1>=2/3]", num["f_p2pa1"], 2 / 3))
        checks.append(_floor("floor[f_p2pa2_on>1/2]", num["f_p2pa2_on"], 0.5, strict=True))
        checks.append(_floor("floor[f_p2pa2_off>1/2]", num["f_p2pa2_off"], 0.5, strict=True))
    return checks
