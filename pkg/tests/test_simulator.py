import math

import pytest

from vodplan.capacity import ClusterParams, ServiceProfile, provision_distributed
from vodplan.erlang import erlang_b
from vodplan.popularity import CatalogModel, p_unpopular
from vodplan.simulator import (
    SimConfig,
    run_sim,
    single_pool_config,
    validate_against_analytic,
)


def make_cluster(**overrides) -> ClusterParams:
    base = dict(
        clusters=1,
        households=600,
        penetration=0.8,
        normal_rate=2.5,
        interactive_rate=4.0,
        normal_hold_s=120.0,
        interactive_hold_s=6.0,
        peak_period_s=7 * 3600.0,
        multicast_factor=5.0,
    )
    base.update(overrides)
    return ClusterParams(**base)


CATALOG = CatalogModel(2000, 200, 0.8)


def distributed_config(**overrides) -> SimConfig:
    base = dict(
        cluster=make_cluster(),
        architecture="distributed",
        local_ports=4,
        central_ports=3,
        catalog=CATALOG,
        seed=42,
        horizon_offers=30_000,
        warmup_offers=3_000,
    )
    base.update(overrides)
    return SimConfig(**base)


def test_config_validation():
    cp = make_cluster()
    with pytest.raises(ValueError):
        SimConfig(cluster=cp, architecture="centralized", ports=None, horizon_offers=100)
    with pytest.raises(ValueError):
        SimConfig(cluster=cp, architecture="distributed", local_ports=1, central_ports=1,
                  catalog=None, horizon_offers=100)
    with pytest.raises(ValueError):
        SimConfig(cluster=cp, architecture="centralized", ports=1)  # no horizon
    with pytest.raises(ValueError):
        SimConfig(cluster=cp, architecture="centralized", ports=1,
                  horizon_offers=100, horizon_time=10.0)
    with pytest.raises(ValueError):
        SimConfig(cluster=cp, architecture="centralized", ports=1,
                  horizon_offers=100, warmup_offers=100)
    with pytest.raises(ValueError):
        SimConfig(cluster=cp, architecture="centralized", ports=1,
                  horizon_offers=100, warmup_time=1.0)
    with pytest.raises(ValueError):
        SimConfig(cluster=cp, architecture="centralized", ports=1,
                  horizon_time=10.0, warmup_time=20.0)
    with pytest.raises(ValueError):
        SimConfig(cluster=cp, architecture="centralized", ports=1,
                  horizon_offers=100, holding="uniform")
    with pytest.raises(ValueError):
        SimConfig(cluster=cp, architecture="centralized", ports=1,
                  horizon_offers=100, seed=-1)


def test_identical_configs_reproduce_bit_identical_reports():
    config = single_pool_config(2.0, 2, seed=42, offers=20_000)
    assert run_sim(config) == run_sim(config)
    dist = distributed_config()
    assert run_sim(dist) == run_sim(dist)


def test_different_seeds_differ():
    a = run_sim(single_pool_config(2.0, 2, seed=1, offers=20_000))
    b = run_sim(single_pool_config(2.0, 2, seed=2, offers=20_000))
    assert a != b


def test_zero_ports_blocks_everything():
    report = run_sim(single_pool_config(2.0, 0, seed=5, offers=5_000))
    stats = report.pools["all"]
    assert stats.blocking_fraction == 1.0
    assert stats.started == 0
    assert stats.blocked == stats.offers


def test_zero_rates_zero_arrivals():
    cp = make_cluster(normal_rate=0.0, interactive_rate=0.0)
    report = run_sim(SimConfig(cluster=cp, architecture="centralized", ports=3,
                               seed=9, horizon_offers=100))
    stats = report.pools["all"]
    assert report.arrivals_normal == 0
    assert report.arrivals_interactive == 0
    assert stats.offers == 0
    assert stats.blocked == 0
    assert stats.blocking_fraction == 0.0


def test_offer_conservation_per_pool():
    report = run_sim(distributed_config())
    for stats in report.pools.values():
        assert stats.started + stats.blocked == stats.offers


def test_blocking_converges_to_analytic():
    config = single_pool_config(2.0, 2, seed=42, offers=110_000, warmup_offers=10_000)
    stats = run_sim(config).pools["all"]
    assert stats.offers >= 100_000
    assert abs(stats.blocking_fraction - erlang_b(2.0, 2)) <= 3.0 * stats.standard_error


def test_mean_busy_tracks_carried_load():
    # carried load = offered * (1 - blocking) for a loss system
    config = single_pool_config(2.0, 2, seed=42, offers=110_000, warmup_offers=10_000)
    stats = run_sim(config).pools["all"]
    carried = 2.0 * (1.0 - erlang_b(2.0, 2))
    assert math.isclose(stats.mean_busy_ports, carried, rel_tol=0.05)


def test_holding_distribution_insensitivity():
    exp = run_sim(single_pool_config(10.0, 14, seed=42, offers=110_000,
                                     warmup_offers=10_000, holding="exponential")).pools["all"]
    det = run_sim(single_pool_config(10.0, 14, seed=43, offers=110_000,
                                     warmup_offers=10_000, holding="deterministic")).pools["all"]
    combined = math.hypot(exp.standard_error, det.standard_error)
    assert abs(exp.blocking_fraction - det.blocking_fraction) <= 3.0 * combined


def test_deterministic_thinning_ratio():
    # with sharing factor Z, roughly one stream offer per Z playback requests
    for z in (2.0, 2.5, 5.0):
        cp = make_cluster(multicast_factor=z, interactive_rate=0.0)
        config = SimConfig(cluster=cp, architecture="centralized", ports=10_000,
                           seed=7, horizon_offers=20_000, warmup_offers=0)
        report = run_sim(config)
        ratio = report.arrivals_normal / report.pools["all"].offers
        assert math.isclose(ratio, z, rel_tol=0.02), z


def test_distributed_routing_matches_popularity_split():
    report = run_sim(distributed_config(local_ports=1_000, central_ports=1_000))
    expected = p_unpopular(CATALOG)
    offers = sum(s.offers for s in report.pools.values())
    se = math.sqrt(expected * (1.0 - expected) / offers)
    assert abs(report.central_share - expected) <= 3.0 * se


def test_time_horizon_mode():
    cp = make_cluster()
    config = SimConfig(cluster=cp, architecture="centralized", ports=5,
                       seed=11, horizon_time=20_000.0, warmup_time=2_000.0)
    report = run_sim(config)
    assert report.duration_s == 18_000.0
    stats = report.pools["all"]
    assert stats.offers > 0
    assert stats.started + stats.blocked == stats.offers
    assert run_sim(config) == report


def test_busy_time_carried_across_empty_measurement_window():
    # one stream admitted before warmup spans the whole window with no event
    # inside it; its busy time must still be integrated
    cp = make_cluster(households=1, penetration=1.0, normal_rate=0.01,
                      interactive_rate=0.0, normal_hold_s=1e6, peak_period_s=1.0,
                      multicast_factor=1.0)
    config = SimConfig(cluster=cp, architecture="centralized", ports=1,
                       seed=3, horizon_time=210.0, warmup_time=200.0,
                       holding="deterministic")
    report = run_sim(config)
    stats = report.pools["all"]
    assert stats.offers == 0
    assert report.duration_s == 10.0
    assert stats.mean_busy_ports == 1.0


def test_multicast_window_mode_shares_streams():
    cp = make_cluster(interactive_rate=0.0)
    windowed = SimConfig(cluster=cp, architecture="centralized", ports=10_000,
                         seed=13, horizon_offers=5_000, warmup_offers=0,
                         multicast_window_s=60.0)
    report = run_sim(windowed)
    # joins make offers rarer than raw requests
    assert report.arrivals_normal > report.pools["all"].offers


def test_validate_zero_load_agrees():
    cp = make_cluster(normal_rate=0.0, interactive_rate=0.0)
    config = SimConfig(cluster=cp, architecture="centralized", ports=0,
                       seed=3, horizon_offers=10)
    record = validate_against_analytic(config, target=0.05)
    assert record.ok
    pool = record.pools[0]
    assert pool.measured_blocking == 0.0
    assert pool.analytic_blocking == 1.0  # zero-port pool blocks by definition
    assert pool.offers == 0


def test_validate_provisioned_pools_meet_target():
    config = single_pool_config(43.33, 49, seed=42, offers=110_000, warmup_offers=10_000)
    record = validate_against_analytic(config, target=0.05)
    assert record.ok
    pool = record.pools[0]
    assert pool.measured_blocking <= 0.05 + 3.0 * pool.standard_error
    assert math.isclose(pool.analytic_blocking, erlang_b(43.33, 49), rel_tol=1e-12)


def test_validate_distributed_uses_split_loads():
    cp = make_cluster()
    provision = provision_distributed(cp, CATALOG, ServiceProfile(3e6, "SD"), 0.05)
    config = SimConfig(cluster=cp, architecture="distributed",
                       local_ports=provision.local_ports,
                       central_ports=provision.central_ports,
                       catalog=CATALOG, seed=42,
                       horizon_offers=60_000, warmup_offers=6_000)
    record = validate_against_analytic(config, target=0.05)
    by_pool = {c.pool: c for c in record.pools}
    assert math.isclose(by_pool["local"].offered_load, provision.local_load, rel_tol=1e-12)
    assert math.isclose(by_pool["central"].offered_load, provision.central_load, rel_tol=1e-12)
    assert record.ok


def test_validate_flags_undersized_pool():
    # pool sized far below the offered load must trip the check
    config = single_pool_config(20.0, 2, seed=42, offers=30_000)
    record = validate_against_analytic(config, target=0.05)
    assert not record.ok


def test_replications_merge():
    config = single_pool_config(2.0, 2, seed=42, offers=30_000)
    record = validate_against_analytic(config, target=0.45, replications=3)
    pool = record.pools[0]
    single = run_sim(config).pools["all"]
    assert pool.offers > single.offers  # three runs pooled
    assert record.replications == 3
    assert abs(pool.measured_blocking - 0.4) < 0.02
    again = validate_against_analytic(config, target=0.45, replications=3)
    assert again == record


def test_interactive_requests_occupy_ports():
    cp = make_cluster(normal_rate=0.0, interactive_rate=4.0, interactive_hold_s=6.0)
    config = SimConfig(cluster=cp, architecture="centralized", ports=2,
                       seed=17, horizon_offers=20_000, warmup_offers=2_000)
    report = run_sim(config)
    stats = report.pools["all"]
    # offered interactive load = 600*0.8*4*6/25200 Erlang
    load = 600 * 0.8 * 4.0 * 6.0 / 25_200.0
    assert abs(stats.blocking_fraction - erlang_b(load, 2)) <= 4.0 * max(stats.standard_error, 1e-4)
    assert report.arrivals_interactive == stats.offers
