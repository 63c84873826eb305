"""Parameter sweeps: point expansion, evaluation, and CSV/report emission.

A sweep evaluates the closed-form dimensioning (and optionally the
simulator) at every point of the Cartesian product of the scenario's sweep
directives, one row per point and service. Failed rows carry an error
instead of aborting the sweep, and output is byte-stable for a fixed
scenario and seed regardless of worker count.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import product

import numpy as np

from .capacity import (
    CentralizedProvision,
    ClusterParams,
    DistributedProvision,
    MessageSizes,
    ServiceProfile,
    inbound_bandwidth,
    provision_centralized,
    provision_distributed,
)
from .erlang import InfeasibleError
from .popularity import CatalogModel
from .scenario import SWEEPABLE, Scenario, scenario_to_toml
from .simulator import ComparisonRecord, SimConfig, validate_against_analytic

DEFAULT_HORIZON_OFFERS = 50_000


@dataclass(frozen=True)
class SweepPoint:
    """One combination of swept values, already applied to the base parameters."""

    index: int
    overrides: tuple[tuple[str, object], ...]
    cluster: ClusterParams | None
    catalog: CatalogModel | None
    blocking_target: float
    error: str | None = None


@dataclass(frozen=True)
class RowResult:
    point_index: int
    overrides: tuple[tuple[str, object], ...]
    service: ServiceProfile
    cluster: ClusterParams | None
    provision: CentralizedProvision | DistributedProvision | None
    inbound_bps: float | None
    comparison: ComparisonRecord | None
    sim_seed: int | None
    error: str | None
    error_kind: str | None  # "invalid" | "infeasible"


@dataclass(frozen=True)
class SweepResult:
    scenario: Scenario
    rows: tuple[RowResult, ...]
    with_sim: bool
    seed: int
    replications: int


def expand_points(scenario: Scenario) -> list[SweepPoint]:
    """Cartesian expansion of the sweep directives over the base parameters.

    The first sweep directive varies slowest. An empty sweep yields the
    single base point. In fixed_total mode the household count is recomputed
    per point as round(base_total / clusters) and any rounding slack shows up
    in the emitted realized-population column.
    """
    base_total = scenario.cluster.clusters * scenario.cluster.households
    specs = scenario.sweep
    combos = product(*[spec.values for spec in specs]) if specs else [()]
    points = []
    for index, combo in enumerate(combos):
        overrides = tuple((spec.parameter, value) for spec, value in zip(specs, combo))
        cluster_kwargs: dict[str, object] = {}
        catalog_kwargs: dict[str, object] = {}
        target = scenario.blocking_target
        for path, value in overrides:
            attr, _ = SWEEPABLE[path]
            if path.startswith("cluster."):
                cluster_kwargs[attr] = value
            elif path.startswith("catalog."):
                catalog_kwargs[attr] = value
            else:
                target = value
        try:
            cluster = replace(scenario.cluster, **cluster_kwargs)
            if scenario.population_mode == "fixed_total":
                households = round(base_total / cluster.clusters)
                cluster = replace(cluster, households=households)
            catalog = scenario.catalog
            if catalog_kwargs:
                catalog = replace(catalog, **catalog_kwargs)
            if not 0.0 < target < 1.0:
                raise ValueError(f"blocking target must be strictly inside (0, 1), got {target}")
        except ValueError as e:
            points.append(
                SweepPoint(index, overrides, None, None, scenario.blocking_target, error=str(e))
            )
            continue
        points.append(SweepPoint(index, overrides, cluster, catalog, target))
    return points


def _build_sim_config(
    scenario: Scenario,
    point: SweepPoint,
    provision: CentralizedProvision | DistributedProvision,
    seed: int,
) -> SimConfig:
    s = scenario.sim
    horizon_offers = s.horizon_offers
    horizon_time = s.horizon_time
    if horizon_offers is None and horizon_time is None:
        horizon_offers = DEFAULT_HORIZON_OFFERS
    common = dict(
        cluster=point.cluster,
        catalog=point.catalog,
        holding=s.holding,
        seed=seed,
        horizon_offers=horizon_offers,
        horizon_time=horizon_time,
        warmup_offers=s.warmup_offers,
        warmup_time=s.warmup_time,
        batch_count=s.batch_count,
        multicast_window_s=s.multicast_window_s,
    )
    if scenario.architecture == "centralized":
        return SimConfig(architecture="centralized", ports=provision.ports, **common)
    return SimConfig(
        architecture="distributed",
        local_ports=provision.local_ports,
        central_ports=provision.central_ports,
        **common,
    )


def _evaluate_row(task) -> RowResult:
    scenario, point, service, sim_seed, with_sim, replications = task
    if point.error is not None:
        return RowResult(
            point_index=point.index,
            overrides=point.overrides,
            service=service,
            cluster=None,
            provision=None,
            inbound_bps=None,
            comparison=None,
            sim_seed=None,
            error=point.error,
            error_kind="invalid",
        )
    try:
        if scenario.architecture == "centralized":
            provision = provision_centralized(
                point.cluster, service, point.blocking_target, scenario.port_cap
            )
        else:
            provision = provision_distributed(
                point.cluster, point.catalog, service, point.blocking_target, scenario.port_cap
            )
    except InfeasibleError as e:
        return RowResult(
            point_index=point.index,
            overrides=point.overrides,
            service=service,
            cluster=point.cluster,
            provision=None,
            inbound_bps=None,
            comparison=None,
            sim_seed=None,
            error=str(e),
            error_kind="infeasible",
        )
    inbound = (
        inbound_bandwidth(point.cluster, scenario.messages)
        if scenario.messages is not None
        else None
    )
    comparison = None
    if with_sim:
        config = _build_sim_config(scenario, point, provision, sim_seed)
        comparison = validate_against_analytic(
            config, point.blocking_target, replications=replications
        )
    return RowResult(
        point_index=point.index,
        overrides=point.overrides,
        service=service,
        cluster=point.cluster,
        provision=provision,
        inbound_bps=inbound,
        comparison=comparison,
        sim_seed=sim_seed if with_sim else None,
        error=None,
        error_kind=None,
    )


def run_sweep(
    scenario: Scenario,
    with_sim: bool = False,
    seed: int | None = None,
    replications: int = 1,
    workers: int = 1,
) -> SweepResult:
    """Evaluate every sweep point; optionally cross-validate with the simulator.

    `seed` overrides the scenario's simulator seed. Per-row child seeds are
    drawn deterministically from it, so results do not depend on `workers`.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    base_seed = scenario.sim.seed if seed is None else seed
    points = expand_points(scenario)
    tasks = []
    n_rows = len(points) * len(scenario.services)
    row_seeds = np.random.SeedSequence(base_seed).generate_state(max(n_rows, 1), np.uint64)
    row = 0
    for point in points:
        for service in scenario.services:
            tasks.append((scenario, point, service, int(row_seeds[row]), with_sim, replications))
            row += 1
    if workers == 1 or len(tasks) <= 1:
        rows = [_evaluate_row(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_evaluate_row, tasks))
    return SweepResult(
        scenario=scenario,
        rows=tuple(rows),
        with_sim=with_sim,
        seed=base_seed,
        replications=replications,
    )


def any_infeasible(result: SweepResult) -> bool:
    return any(r.error_kind == "infeasible" for r in result.rows)


def any_sim_disagreement(result: SweepResult) -> bool:
    return any(r.comparison is not None and not r.comparison.ok for r in result.rows)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _sweep_column(path: str) -> str:
    _, kind = SWEEPABLE[path]
    return f"{path}_s" if kind == "duration" else path


def _sim_pools(scenario: Scenario) -> list[str]:
    return ["all"] if scenario.architecture == "centralized" else ["local", "central"]


def csv_columns(result: SweepResult) -> list[str]:
    scenario = result.scenario
    cols = [_sweep_column(spec.parameter) for spec in scenario.sweep]
    cols += ["households", "households_total", "service", "r_bps"]
    if scenario.architecture == "centralized":
        cols += ["M_c", "S_c", "W_c", "W_ch"]
    else:
        cols += ["M_L", "M_CL", "S_L", "S_CL", "W_LL", "W_LC", "W_ch", "TW_LC", "TW"]
    if scenario.messages is not None:
        cols.append("W_oc")
    if result.with_sim:
        cols.append("sim_seed")
        for pool in _sim_pools(scenario):
            prefix = "sim" if pool == "all" else f"sim_{pool}"
            cols += [
                f"{prefix}_offers",
                f"{prefix}_blocked",
                f"{prefix}_blocking",
                f"{prefix}_se",
                f"{prefix}_analytic",
                f"{prefix}_ok",
            ]
        if scenario.architecture == "distributed":
            cols.append("sim_central_share")
    cols.append("error")
    return cols


def _row_values(result: SweepResult, row: RowResult) -> list[str]:
    scenario = result.scenario
    overrides = dict(row.overrides)
    values = [_fmt(overrides.get(spec.parameter)) for spec in scenario.sweep]
    if row.cluster is not None:
        values += [
            _fmt(row.cluster.households),
            _fmt(row.cluster.clusters * row.cluster.households),
        ]
    else:
        values += ["", ""]
    values += [row.service.label, _fmt(row.service.stream_rate_bps)]
    p = row.provision
    if scenario.architecture == "centralized":
        if p is None:
            values += [""] * 4
        else:
            values += [
                _fmt(p.offered_load),
                _fmt(p.ports),
                _fmt(p.bandwidth_bps),
                _fmt(p.per_household_bps),
            ]
    else:
        if p is None:
            values += [""] * 9
        else:
            values += [
                _fmt(p.local_load),
                _fmt(p.central_load),
                _fmt(p.local_ports),
                _fmt(p.central_ports),
                _fmt(p.local_bandwidth_bps),
                _fmt(p.central_bandwidth_bps),
                _fmt(p.per_household_bps),
                _fmt(p.area_bandwidth_bps),
                _fmt(p.total_bandwidth_bps),
            ]
    if scenario.messages is not None:
        values.append(_fmt(row.inbound_bps))
    if result.with_sim:
        values.append(_fmt(row.sim_seed))
        comparison = row.comparison
        by_pool = {c.pool: c for c in comparison.pools} if comparison is not None else {}
        for pool in _sim_pools(scenario):
            c = by_pool.get(pool)
            if c is None:
                values += [""] * 6
            else:
                values += [
                    _fmt(c.offers),
                    _fmt(c.blocked),
                    _fmt(c.measured_blocking),
                    _fmt(c.standard_error),
                    _fmt(c.analytic_blocking),
                    _fmt(c.meets_target),
                ]
        if scenario.architecture == "distributed":
            if comparison is None:
                values.append("")
            else:
                total = sum(c.offers for c in comparison.pools)
                central = next(c.offers for c in comparison.pools if c.pool == "central")
                values.append(_fmt(central / total if total else 0.0))
    values.append(row.error or "")
    return values


def emit_csv(result: SweepResult) -> str:
    """Rows in sweep order as UTF-8 CSV text with a stable header."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_columns(result))
    for row in result.rows:
        writer.writerow(_row_values(result, row))
    return buf.getvalue()


def emit_report(result: SweepResult) -> str:
    """Plain-text report: scenario echo, result table, sim-vs-analytic blocks."""
    scenario = result.scenario
    out = []
    out.append(f"vodplan report: {scenario.name}")
    out.append("=" * (16 + len(scenario.name)))
    out.append(f"architecture: {scenario.architecture}")
    out.append(f"population mode: {scenario.population_mode}")
    out.append(f"blocking target: {_fmt(scenario.blocking_target)}")
    services = "; ".join(f"{s.label} @ {_fmt(s.stream_rate_bps)} bps" for s in scenario.services)
    out.append(f"services: {services}")
    if scenario.meta:
        out.append("notes:")
        for key, value in scenario.meta:
            out.append(f"  {key}: {value}")
    out.append("")
    out.append("scenario echo (canonical units; reloadable)")
    out.append("-------------------------------------------")
    out.append(scenario_to_toml(result.scenario).rstrip("\n"))
    out.append("")
    out.append("results")
    out.append("-------")
    columns = csv_columns(result)
    table = [columns] + [_row_values(result, row) for row in result.rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(columns))]
    for r in table:
        out.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    if result.with_sim:
        out.append("")
        out.append("sim vs analytic")
        out.append("---------------")
        for row in result.rows:
            if row.comparison is None:
                continue
            for c in row.comparison.pools:
                verdict = "ok" if c.meets_target else "DISAGREES"
                out.append(
                    f"row {row.point_index} [{row.service.label}] pool {c.pool}: "
                    f"measured {_fmt(c.measured_blocking)} "
                    f"(se {_fmt(c.standard_error)}, offers {c.offers}) "
                    f"vs analytic {_fmt(c.analytic_blocking)}, "
                    f"target {_fmt(row.comparison.target)} -> {verdict}"
                )
    out.append("")
    out.append(
        "provenance: analytic columns are recomputed from each row's parameters by "
        "vodplan.capacity; measured columns come from vodplan.simulator with the row's "
        "sim_seed and batch-means standard errors."
    )
    return "\n".join(out) + "\n"
