"""Built-in invariant and oracle checks, runnable from the CLI.

Each check returns its name, verdict, and a one-line detail. The blocking
recurrence is compared against an independent log-space direct summation;
the remaining checks exercise exact identities and monotonicity properties
on seeded random scenarios.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .capacity import ClusterParams, centralized_load, cluster_base_load, distributed_loads
from .erlang import erlang_b, erlang_b_reference, min_ports
from .popularity import CatalogModel, approximation_errors, p_unpopular, psi_approx, psi_exact

GRID_LOADS = (0.1, 1.0, 2.0, 10.0, 43.33, 100.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def _random_cluster(rng: np.random.Generator) -> ClusterParams:
    return ClusterParams(
        clusters=int(rng.integers(1, 200)),
        households=int(rng.integers(1, 2000)),
        penetration=float(rng.uniform(0.01, 1.0)),
        normal_rate=float(rng.uniform(0.0, 6.0)),
        interactive_rate=float(rng.uniform(0.0, 10.0)),
        normal_hold_s=float(rng.uniform(0.0, 7200.0)),
        interactive_hold_s=float(rng.uniform(0.0, 30.0)),
        peak_period_s=float(rng.uniform(3600.0, 6 * 3600.0)),
        multicast_factor=float(rng.uniform(1.0, 30.0)),
    )


def _random_catalog(rng: np.random.Generator) -> CatalogModel:
    total = int(rng.integers(1, 5000))
    return CatalogModel(
        total_movies=total,
        popular_count=int(rng.integers(1, total + 1)),
        zipf_exponent=float(rng.uniform(0.01, 0.99)),
    )


SUBNORMAL_FLOOR = 1e-308  # below double-precision normals, relative comparison is meaningless


def check_recurrence_vs_reference(max_ports: int = 120) -> CheckResult:
    start = time.perf_counter()
    worst = 0.0
    for load in GRID_LOADS:
        for ports in range(max_ports + 1):
            got = erlang_b(load, ports)
            ref = erlang_b_reference(load, ports)
            if max(got, ref) < SUBNORMAL_FLOOR:
                continue
            rel = abs(got - ref) / ref if ref else abs(got)
            worst = max(worst, rel)
    elapsed = time.perf_counter() - start
    return CheckResult(
        "erlang-b recurrence vs direct summation",
        worst <= 1e-9,
        f"worst relative error {worst:.3e} over {len(GRID_LOADS)}x{max_ports + 1} grid "
        f"({elapsed:.2f}s)",
    )


def check_inverse_consistency(trials: int = 1000, seed: int = 20240801) -> CheckResult:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(trials):
        load = float(rng.uniform(0.0, 200.0))
        target = float(rng.uniform(0.001, 0.5))
        ports = min_ports(load, target)
        if erlang_b(load, ports) > target:
            bad += 1
        elif ports >= 1 and erlang_b(load, ports - 1) <= target:
            bad += 1
    return CheckResult(
        "min-ports inverse consistency",
        bad == 0,
        f"{bad} violations in {trials} random (load, target) pairs",
    )


def check_monotonicity(seed: int = 20240802) -> CheckResult:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(300):
        load = float(rng.uniform(0.05, 150.0))
        ports = int(rng.integers(1, 200))
        if erlang_b(load, ports + 1) >= erlang_b(load, ports):
            bad += 1
        step = float(rng.uniform(0.05, 10.0))
        if erlang_b(load + step, ports) <= erlang_b(load, ports):
            bad += 1
    return CheckResult(
        "erlang-b monotone in ports and load",
        bad == 0,
        f"{bad} violations in 300 random (load, ports) probes",
    )


def check_conservation(trials: int = 1000, seed: int = 20240803) -> CheckResult:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(trials):
        cp = _random_cluster(rng)
        catalog = _random_catalog(rng)
        local, central = distributed_loads(cp, catalog)
        if local + central != cluster_base_load(cp):
            bad += 1
        if psi_approx(catalog) + p_unpopular(catalog) != 1.0:
            bad += 1
    return CheckResult(
        "load split and popularity complement conserve exactly",
        bad == 0,
        f"{bad} violations in {trials} random scenarios",
    )


def check_trunking(trials: int = 200, seed: int = 20240804) -> CheckResult:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(trials):
        parts = int(rng.integers(2, 12))
        loads = rng.uniform(0.0, 60.0, parts)
        target = float(rng.uniform(0.005, 0.5))
        pooled = min_ports(float(loads.sum()), target)
        split = sum(min_ports(float(a), target) for a in loads)
        if pooled > split:
            bad += 1
    return CheckResult(
        "pooling never needs more ports than fragmented pools",
        bad == 0,
        f"{bad} violations in {trials} random splits",
    )


def check_capacity_monotonicity(seed: int = 20240805) -> CheckResult:
    rng = np.random.default_rng(seed)
    bad = 0
    growing = ("households", "penetration", "normal_rate", "interactive_rate",
               "normal_hold_s", "interactive_hold_s")
    for _ in range(200):
        cp = _random_cluster(rng)
        base = centralized_load(cp)
        for attr in growing:
            value = getattr(cp, attr)
            bumped = value + (1 if attr == "households" else float(rng.uniform(0.01, 1.0)) * (value + 0.1))
            if attr == "penetration":
                bumped = min(1.0, value + 0.01)
            if centralized_load(replace(cp, **{attr: bumped})) < base:
                bad += 1
        if centralized_load(replace(cp, multicast_factor=cp.multicast_factor + 1.0)) > base:
            bad += 1
    return CheckResult(
        "offered load monotone in demand, antitone in multicast factor",
        bad == 0,
        f"{bad} violations in 200 random perturbations",
    )


def check_popularity_profile() -> tuple[CheckResult, list[str]]:
    """Approximation-quality report plus the shrink-toward-full-catalog check."""
    lines = ["popular-mass approximation error |exact - closed form|:"]
    ok = True
    for total, alpha in ((1000, 0.5), (1000, 0.8), (10000, 0.8)):
        errors = approximation_errors(total, alpha)
        cells = ", ".join(f"k={k}: {err:.4f}" for k, err in errors)
        lines.append(f"  N={total} alpha={alpha}: {cells}")
        values = [err for _, err in errors]
        if values[-1] != 0.0:
            ok = False
        if any(b > a + 1e-12 for a, b in zip(values, values[1:])):
            ok = False
    detail = "error shrinks toward k = N and is 0 at k = N"
    if not ok:
        detail = "error fails to shrink toward k = N"
    return CheckResult("popularity approximation quality", ok, detail), lines


def check_exactness_fixed_points() -> CheckResult:
    ok = (
        erlang_b(2.0, 2) == 0.4
        and abs(erlang_b(2.0, 3) - 4.0 / 19.0) < 1e-15
        and erlang_b(5.0, 0) == 1.0
        and erlang_b(0.0, 7) == 0.0
        and min_ports(0.0, 0.05) == 0
        and min_ports(2.0, 0.4) == 2
    )
    return CheckResult(
        "erlang-b fixed points",
        ok,
        "B(2,2)=0.4, B(2,3)=4/19, zero-port and zero-load edges",
    )


def check_zipf_monotone() -> CheckResult:
    total = 1000
    alpha = 0.8
    previous_exact = 0.0
    previous_approx = 0.0
    ok = True
    for k in range(1, total + 1, 37):
        catalog = CatalogModel(total, k, alpha)
        e, a = psi_exact(catalog), psi_approx(catalog)
        if e < previous_exact or a < previous_approx:
            ok = False
        previous_exact, previous_approx = e, a
    full = CatalogModel(total, total, alpha)
    ok = ok and psi_exact(full) == 1.0 and psi_approx(full) == 1.0
    return CheckResult(
        "popular mass monotone in catalog split",
        ok,
        f"checked N={total}, alpha={alpha}, both forms reach exactly 1 at k=N",
    )


def run_checks(quick: bool = False) -> tuple[list[CheckResult], list[str]]:
    """Run the whole suite; returns results plus the approximation report lines."""
    inverse_trials = 200 if quick else 1000
    conservation_trials = 200 if quick else 1000
    trunk_trials = 50 if quick else 200
    results = [
        check_exactness_fixed_points(),
        check_recurrence_vs_reference(),
        check_inverse_consistency(trials=inverse_trials),
        check_monotonicity(),
        check_conservation(trials=conservation_trials),
        check_trunking(trials=trunk_trials),
        check_capacity_monotonicity(),
        check_zipf_monotone(),
    ]
    profile_result, profile_lines = check_popularity_profile()
    results.append(profile_result)
    return results, profile_lines
