"""Closed-form port and bandwidth dimensioning.

Covers three layouts: a single pooled server farm serving every cluster, a
proxy layout where each cluster has a local port pool and forwards requests
for unpopular titles to central servers, and the inbound (client-to-server)
request channel.

All durations are canonical seconds and all bitrates canonical bits/second;
request rates are counts per household per peak period. Offered loads are
then dimensionless Erlangs regardless of the units the caller started from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .erlang import DEFAULT_PORT_CAP, min_ports
from .popularity import CatalogModel, p_unpopular, psi_approx


@dataclass(frozen=True)
class ClusterParams:
    """Demographics and per-household traffic for one planning scenario.

    `normal_rate` counts playback-start requests per household per peak
    period; `interactive_rate` counts trick-play (pause/jump/scan) requests,
    each served by a short unicast stream. `multicast_factor` is the mean
    number of viewers sharing one broadcast stream, so only normal traffic
    is divided by it.
    """

    clusters: int
    households: int
    penetration: float
    normal_rate: float
    interactive_rate: float
    normal_hold_s: float
    interactive_hold_s: float
    peak_period_s: float
    multicast_factor: float

    def __post_init__(self) -> None:
        if self.clusters < 1:
            raise ValueError(f"clusters must be >= 1, got {self.clusters}")
        if self.households < 1:
            raise ValueError(f"households must be >= 1, got {self.households}")
        if not 0.0 < self.penetration <= 1.0:
            raise ValueError(f"penetration must be in (0, 1], got {self.penetration}")
        for name in ("normal_rate", "interactive_rate", "normal_hold_s", "interactive_hold_s"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        if not self.peak_period_s > 0.0:
            raise ValueError(f"peak_period_s must be > 0, got {self.peak_period_s}")
        if not self.multicast_factor >= 1.0:
            raise ValueError(f"multicast_factor must be >= 1, got {self.multicast_factor}")


@dataclass(frozen=True)
class ServiceProfile:
    """One stream class: the bitrate a single server port carries."""

    stream_rate_bps: float
    label: str = "custom"

    def __post_init__(self) -> None:
        if not self.stream_rate_bps > 0.0:
            raise ValueError(f"stream_rate_bps must be > 0, got {self.stream_rate_bps}")


@dataclass(frozen=True)
class MessageSizes:
    """Request message sizes on the inbound channel, in bits."""

    normal_bits: int
    interactive_bits: int

    def __post_init__(self) -> None:
        if self.normal_bits <= 0 or self.interactive_bits <= 0:
            raise ValueError("message sizes must be positive bit counts")


@dataclass(frozen=True)
class CentralizedProvision:
    """Dimensioning result for the pooled layout."""

    offered_load: float
    ports: int
    bandwidth_bps: float
    per_household_bps: float

    architecture = "centralized"


@dataclass(frozen=True)
class DistributedProvision:
    """Dimensioning result for the local-proxy layout, per cluster area.

    `total_bandwidth_bps` scales the per-area figure by the cluster count;
    every other field describes a single cluster and its share of the
    central servers.
    """

    local_load: float
    central_load: float
    local_ports: int
    central_ports: int
    local_bandwidth_bps: float
    central_bandwidth_bps: float
    area_bandwidth_bps: float
    per_household_bps: float
    total_bandwidth_bps: float

    architecture = "distributed"


def centralized_load(cp: ClusterParams, interactive_port_cost: float = 1.0) -> float:
    """Offered load in Erlangs on the pooled server farm.

    Normal traffic is shared Z viewers to a stream; interactive traffic is
    unicast, one short stream per request. `interactive_port_cost` weights
    the interactive term for what-if studies where a trick-play stream is
    cheaper than a full-rate port; the default prices all ports uniformly.
    """
    subscribers = cp.clusters * cp.households * cp.penetration
    normal = subscribers * cp.normal_rate * cp.normal_hold_s / (
        cp.multicast_factor * cp.peak_period_s
    )
    interactive = subscribers * cp.interactive_rate * cp.interactive_hold_s / cp.peak_period_s
    return normal + interactive_port_cost * interactive


def cluster_base_load(cp: ClusterParams, interactive_port_cost: float = 1.0) -> float:
    """Offered load in Erlangs generated by a single cluster."""
    subscribers = cp.households * cp.penetration
    normal = subscribers * cp.normal_rate * cp.normal_hold_s / (
        cp.multicast_factor * cp.peak_period_s
    )
    interactive = subscribers * cp.interactive_rate * cp.interactive_hold_s / cp.peak_period_s
    return normal + interactive_port_cost * interactive


def distributed_loads(
    cp: ClusterParams,
    catalog: CatalogModel,
    interactive_port_cost: float = 1.0,
) -> tuple[float, float]:
    """Split one cluster's load into (local, forwarded-to-central) Erlangs.

    Popular-title requests stay on the local proxy; the rest travel to the
    central servers. The two parts always sum back to the cluster base load
    bit-exactly: the larger share is computed by multiplication and the
    smaller by subtraction, which Sterbenz's lemma makes exact.
    """
    base = cluster_base_load(cp, interactive_port_cost)
    popular = psi_approx(catalog)
    if popular >= 0.5:
        local = base * popular
        central = base - local
    else:
        central = base * p_unpopular(catalog)
        local = base - central
    return local, central


def provision_centralized(
    cp: ClusterParams,
    svc: ServiceProfile,
    blocking_target: float,
    port_cap: int = DEFAULT_PORT_CAP,
    interactive_port_cost: float = 1.0,
) -> CentralizedProvision:
    """Size the pooled farm for a blocking target and price its bandwidth."""
    load = centralized_load(cp, interactive_port_cost)
    ports = min_ports(load, blocking_target, port_cap)
    bandwidth = ports * svc.stream_rate_bps
    per_household = svc.stream_rate_bps * ports / (cp.clusters * cp.households)
    return CentralizedProvision(
        offered_load=load,
        ports=ports,
        bandwidth_bps=bandwidth,
        per_household_bps=per_household,
    )


def provision_distributed(
    cp: ClusterParams,
    catalog: CatalogModel,
    svc: ServiceProfile,
    blocking_target: float,
    port_cap: int = DEFAULT_PORT_CAP,
    interactive_port_cost: float = 1.0,
) -> DistributedProvision:
    """Size one cluster's local pool and its central-server share.

    The blocking target applies independently to each pool; the local and
    central pools are sized by separate inverse Erlang-B searches.
    """
    local_load, central_load = distributed_loads(cp, catalog, interactive_port_cost)
    local_ports = min_ports(local_load, blocking_target, port_cap)
    central_ports = min_ports(central_load, blocking_target, port_cap)
    r = svc.stream_rate_bps
    local_bw = local_ports * r
    central_bw = central_ports * r
    area_bw = r * (central_ports + local_ports)
    per_household = r * (central_ports + local_ports) / cp.households
    total_bw = cp.clusters * area_bw
    return DistributedProvision(
        local_load=local_load,
        central_load=central_load,
        local_ports=local_ports,
        central_ports=central_ports,
        local_bandwidth_bps=local_bw,
        central_bandwidth_bps=central_bw,
        area_bandwidth_bps=area_bw,
        per_household_bps=per_household,
        total_bandwidth_bps=total_bw,
    )


def inbound_bandwidth(cp: ClusterParams, msg: MessageSizes) -> float:
    """Bits/second of request traffic on the inbound (client-to-server) channel."""
    subscribers = cp.penetration * cp.clusters * cp.households
    bits_per_period = subscribers * (
        cp.normal_rate * msg.normal_bits + cp.interactive_rate * msg.interactive_bits
    )
    return bits_per_period / cp.peak_period_s
