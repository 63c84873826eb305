"""Event-driven loss-system simulator for stream-request traffic.

Simulates the same system the closed forms dimension: Poisson playback and
trick-play request arrivals, multicast sharing of playback streams, finite
port pools with blocked-calls-lost, and (in the proxy layout) routing of
each stream to the local or central pool by title popularity.

One run is strictly single-threaded and fully determined by its seed;
independent runs may execute concurrently.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace

import numpy as np

from .capacity import ClusterParams, centralized_load, distributed_loads
from .erlang import erlang_b
from .popularity import CatalogModel, p_unpopular

_ARRIVE_NORMAL = 0
_ARRIVE_INTERACTIVE = 1
_STREAM_END = 2


@dataclass(frozen=True)
class SimConfig:
    """Inputs for one simulation run.

    `horizon_offers` / `warmup_offers` count stream offers (pool admission
    attempts, all pools combined, warmup included); the `_time` variants are
    simulated seconds. Exactly one horizon kind must be set, warmup must use
    the same kind, and the horizon must strictly exceed the warmup. A warmup
    left unset defaults to 10% of the horizon.

    `multicast_window_s` switches playback-stream sharing from deterministic
    every-Z-th-request thinning to join-any-stream-younger-than-the-window
    batching; the window mode is a sensitivity study and does not reproduce
    the closed-form load division by Z.
    """

    cluster: ClusterParams
    architecture: str
    ports: int | None = None
    local_ports: int | None = None
    central_ports: int | None = None
    catalog: CatalogModel | None = None
    holding: str = "exponential"
    seed: int = 0
    horizon_offers: int | None = None
    horizon_time: float | None = None
    warmup_offers: int | None = None
    warmup_time: float | None = None
    batch_count: int = 20
    multicast_window_s: float | None = None

    def __post_init__(self) -> None:
        if self.architecture not in ("centralized", "distributed"):
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if self.architecture == "centralized":
            if self.ports is None or self.ports < 0:
                raise ValueError("centralized runs need ports >= 0")
        else:
            if self.local_ports is None or self.local_ports < 0:
                raise ValueError("distributed runs need local_ports >= 0")
            if self.central_ports is None or self.central_ports < 0:
                raise ValueError("distributed runs need central_ports >= 0")
            if self.catalog is None:
                raise ValueError("distributed runs need a catalog for the popularity split")
        if self.holding not in ("exponential", "deterministic"):
            raise ValueError(f"unknown holding distribution {self.holding!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an integer in [0, 2^64), got {self.seed!r}")
        if (self.horizon_offers is None) == (self.horizon_time is None):
            raise ValueError("set exactly one of horizon_offers / horizon_time")
        if self.horizon_offers is not None:
            if self.horizon_offers < 1:
                raise ValueError("horizon_offers must be >= 1")
            if self.warmup_time is not None:
                raise ValueError("offer-count horizon needs an offer-count warmup")
            if self.warmup_offers is not None and not 0 <= self.warmup_offers < self.horizon_offers:
                raise ValueError("warmup_offers must be >= 0 and strictly below horizon_offers")
        else:
            if not self.horizon_time > 0.0:
                raise ValueError("horizon_time must be > 0")
            if self.warmup_offers is not None:
                raise ValueError("time horizon needs a time warmup")
            if self.warmup_time is not None and not 0.0 <= self.warmup_time < self.horizon_time:
                raise ValueError("warmup_time must be >= 0 and strictly below horizon_time")
        if self.batch_count < 2:
            raise ValueError("batch_count must be >= 2")
        if self.multicast_window_s is not None and self.multicast_window_s < 0.0:
            raise ValueError("multicast_window_s must be >= 0")


@dataclass(frozen=True)
class PoolStats:
    """Measured (post-warmup) outcome of one port pool."""

    ports: int
    offers: int
    started: int
    blocked: int
    blocking_fraction: float
    mean_busy_ports: float
    standard_error: float


@dataclass(frozen=True)
class SimReport:
    """Measured (post-warmup) outcome of one run."""

    arrivals_normal: int
    arrivals_interactive: int
    streams_started: int
    pools: dict[str, PoolStats]
    central_share: float | None
    duration_s: float


class _Pool:
    __slots__ = (
        "capacity", "busy", "offers", "started", "blocked",
        "outcomes", "busy_integral", "last_change", "last_admit",
    )

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.busy = 0
        self.offers = 0
        self.started = 0
        self.blocked = 0
        self.outcomes: list[int] = []
        self.busy_integral = 0.0
        self.last_change = 0.0
        self.last_admit: float | None = None

    def advance(self, t: float) -> None:
        self.busy_integral += self.busy * (t - self.last_change)
        self.last_change = t

    def reset_measurement(self, t: float) -> None:
        self.advance(t)
        self.busy_integral = 0.0


def _batch_standard_error(outcomes: list[int], batch_count: int) -> float:
    """Batch-means standard error of the blocking fraction."""
    n = len(outcomes)
    k = min(batch_count, n)
    if k < 2:
        return 0.0
    m = n // k
    used = np.asarray(outcomes[: k * m], dtype=float).reshape(k, m)
    means = used.mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(k))


def run_sim(config: SimConfig) -> SimReport:
    """Execute one run and return its measured statistics.

    Identical configs (seed included) produce bit-identical reports.
    """
    cp = config.cluster
    distributed = config.architecture == "distributed"

    if distributed:
        rate_n = cp.households * cp.penetration * cp.normal_rate / cp.peak_period_s
        rate_i = cp.households * cp.penetration * cp.interactive_rate / cp.peak_period_s
        pools = {"local": _Pool(config.local_ports), "central": _Pool(config.central_ports)}
        frac_central = p_unpopular(config.catalog)
    else:
        subscribers = cp.clusters * cp.households * cp.penetration
        rate_n = subscribers * cp.normal_rate / cp.peak_period_s
        rate_i = subscribers * cp.interactive_rate / cp.peak_period_s
        pools = {"all": _Pool(config.ports)}
        frac_central = 0.0

    if rate_n == 0.0 and rate_i == 0.0:
        stats = {
            name: PoolStats(p.capacity, 0, 0, 0, 0.0, 0.0, 0.0) for name, p in pools.items()
        }
        return SimReport(0, 0, 0, stats, 0.0 if distributed else None, 0.0)

    seq = np.random.SeedSequence(config.seed)
    rng_normal, rng_interactive, rng_hold, rng_route = (
        np.random.Generator(np.random.PCG64(child)) for child in seq.spawn(4)
    )

    events: list[tuple[float, int, int, str]] = []
    tick = 0

    def schedule(t: float, kind: int, pool_name: str = "") -> None:
        nonlocal tick
        heapq.heappush(events, (t, tick, kind, pool_name))
        tick += 1

    if rate_n > 0.0:
        schedule(float(rng_normal.exponential(1.0 / rate_n)), _ARRIVE_NORMAL)
    if rate_i > 0.0:
        schedule(float(rng_interactive.exponential(1.0 / rate_i)), _ARRIVE_INTERACTIVE)

    horizon_offers = config.horizon_offers
    horizon_time = config.horizon_time
    if horizon_offers is not None:
        warmup_offers = (
            config.warmup_offers if config.warmup_offers is not None else horizon_offers // 10
        )
        warmup_time = None
    else:
        warmup_offers = None
        warmup_time = (
            config.warmup_time if config.warmup_time is not None else 0.1 * horizon_time
        )

    measuring = warmup_offers == 0 or warmup_time == 0.0
    measure_start = 0.0
    total_offers = 0
    arrivals_normal = 0
    arrivals_interactive = 0

    # deterministic thinning state: stream k is offered by request floor(k*Z)+1
    z = cp.multicast_factor
    window = config.multicast_window_s
    requests_seen = 0
    streams_thinned = 0
    next_stream_request = 1

    def route_pool() -> str:
        if not distributed:
            return "all"
        return "central" if rng_route.random() < frac_central else "local"

    def begin_measurement(t: float) -> None:
        nonlocal measuring, measure_start
        measuring = True
        measure_start = t
        for p in pools.values():
            p.reset_measurement(t)

    def offer_stream(t: float, pool_name: str, hold_mean: float, joinable: bool) -> None:
        nonlocal total_offers
        total_offers += 1
        if warmup_offers is not None and not measuring and total_offers > warmup_offers:
            begin_measurement(t)
        pool = pools[pool_name]
        admitted = pool.busy < pool.capacity
        if admitted:
            pool.advance(t)
            pool.busy += 1
            if joinable:
                pool.last_admit = t
            dur = hold_mean if config.holding == "deterministic" else float(
                rng_hold.exponential(hold_mean)
            )
            schedule(t + dur, _STREAM_END, pool_name)
        if measuring:
            pool.offers += 1
            if admitted:
                pool.started += 1
                pool.outcomes.append(0)
            else:
                pool.blocked += 1
                pool.outcomes.append(1)

    end_time = 0.0
    while events:
        t, _, kind, pool_name = heapq.heappop(events)
        # flip before the horizon check: the window must open even when no
        # event lands inside it, or busy time carried across it would vanish
        if warmup_time is not None and not measuring and t >= warmup_time:
            begin_measurement(warmup_time)
        if horizon_time is not None and t > horizon_time:
            end_time = horizon_time
            break
        end_time = t

        if kind == _STREAM_END:
            pool = pools[pool_name]
            pool.advance(t)
            pool.busy -= 1
            continue

        if kind == _ARRIVE_NORMAL:
            schedule(t + float(rng_normal.exponential(1.0 / rate_n)), _ARRIVE_NORMAL)
            requests_seen += 1
            if window is not None:
                name = route_pool()
                pool = pools[name]
                joins = pool.last_admit is not None and t - pool.last_admit <= window
                if not joins:
                    offer_stream(t, name, cp.normal_hold_s, joinable=True)
            else:
                if requests_seen == next_stream_request:
                    streams_thinned += 1
                    next_stream_request = math.floor(streams_thinned * z) + 1
                    offer_stream(t, route_pool(), cp.normal_hold_s, joinable=True)
            # counted after the offer so the request that opens the
            # measurement window is included in it
            if measuring:
                arrivals_normal += 1
        else:
            schedule(t + float(rng_interactive.exponential(1.0 / rate_i)), _ARRIVE_INTERACTIVE)
            offer_stream(t, route_pool(), cp.interactive_hold_s, joinable=False)
            if measuring:
                arrivals_interactive += 1

        if horizon_offers is not None and total_offers >= horizon_offers:
            break

    if not measuring:
        begin_measurement(end_time)
    for p in pools.values():
        p.advance(end_time)
    duration = end_time - measure_start

    stats: dict[str, PoolStats] = {}
    started_total = 0
    measured_offers = 0
    for name, p in pools.items():
        fraction = p.blocked / p.offers if p.offers else 0.0
        mean_busy = p.busy_integral / duration if duration > 0.0 else 0.0
        stats[name] = PoolStats(
            ports=p.capacity,
            offers=p.offers,
            started=p.started,
            blocked=p.blocked,
            blocking_fraction=fraction,
            mean_busy_ports=mean_busy,
            standard_error=_batch_standard_error(p.outcomes, config.batch_count),
        )
        started_total += p.started
        measured_offers += p.offers

    central_share = None
    if distributed:
        central_share = stats["central"].offers / measured_offers if measured_offers else 0.0

    return SimReport(
        arrivals_normal=arrivals_normal,
        arrivals_interactive=arrivals_interactive,
        streams_started=started_total,
        pools=stats,
        central_share=central_share,
        duration_s=duration,
    )


@dataclass(frozen=True)
class PoolComparison:
    """Measured vs analytic blocking for one pool."""

    pool: str
    ports: int
    offered_load: float
    analytic_blocking: float
    measured_blocking: float
    standard_error: float
    offers: int
    blocked: int
    meets_target: bool


@dataclass(frozen=True)
class ComparisonRecord:
    target: float
    replications: int
    pools: tuple[PoolComparison, ...]
    ok: bool


def validate_against_analytic(
    config: SimConfig,
    target: float,
    replications: int = 1,
    se_multiplier: float = 3.0,
) -> ComparisonRecord:
    """Run the simulator at analytically sized pools and compare blocking.

    A pool passes when its measured blocking does not exceed the target by
    more than `se_multiplier` standard errors. With multiple replications
    the standard error comes from the spread of per-replication fractions;
    a single run falls back to its batch-means estimate.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    if config.architecture == "distributed":
        local_load, central_load = distributed_loads(config.cluster, config.catalog)
        loads = {"local": local_load, "central": central_load}
    else:
        loads = {"all": centralized_load(config.cluster)}

    if replications == 1:
        seeds = [config.seed]
    else:
        state = np.random.SeedSequence(config.seed).generate_state(replications, np.uint64)
        seeds = [int(s) for s in state]
    reports = [run_sim(replace(config, seed=s)) for s in seeds]

    comparisons = []
    for name, load in loads.items():
        fractions = [r.pools[name].blocking_fraction for r in reports]
        offers = sum(r.pools[name].offers for r in reports)
        blocked = sum(r.pools[name].blocked for r in reports)
        ports = reports[0].pools[name].ports
        measured = float(np.mean(fractions))
        if replications == 1:
            se = reports[0].pools[name].standard_error
        else:
            se = float(np.std(fractions, ddof=1) / math.sqrt(replications))
        analytic = erlang_b(load, ports)
        meets = offers == 0 or measured <= target + se_multiplier * se
        comparisons.append(
            PoolComparison(
                pool=name,
                ports=ports,
                offered_load=load,
                analytic_blocking=analytic,
                measured_blocking=measured,
                standard_error=se,
                offers=offers,
                blocked=blocked,
                meets_target=meets,
            )
        )
    return ComparisonRecord(
        target=target,
        replications=replications,
        pools=tuple(comparisons),
        ok=all(c.meets_target for c in comparisons),
    )


def single_pool_config(
    offered_load: float,
    ports: int,
    seed: int,
    offers: int,
    holding: str = "exponential",
    warmup_offers: int | None = None,
) -> SimConfig:
    """One Poisson stream source against one pool, for calibration runs.

    Requests arrive at 1/s with no multicast sharing and no trick-play
    traffic; the mean holding time equals the requested offered load.
    """
    cp = ClusterParams(
        clusters=1,
        households=1,
        penetration=1.0,
        normal_rate=1.0,
        interactive_rate=0.0,
        normal_hold_s=offered_load,
        interactive_hold_s=0.0,
        peak_period_s=1.0,
        multicast_factor=1.0,
    )
    return SimConfig(
        cluster=cp,
        architecture="centralized",
        ports=ports,
        seed=seed,
        horizon_offers=offers,
        warmup_offers=warmup_offers,
        holding=holding,
    )
