"""Capacity planning for large-scale video-on-demand networks.

Closed-form Erlang-B dimensioning of server ports and link bandwidth for
pooled and local-proxy layouts, a Zipf-like popularity model for the
local/central traffic split, and a discrete-event loss-system simulator
that cross-validates the closed forms.
"""

from .capacity import (
    CentralizedProvision,
    ClusterParams,
    DistributedProvision,
    MessageSizes,
    ServiceProfile,
    centralized_load,
    cluster_base_load,
    distributed_loads,
    inbound_bandwidth,
    provision_centralized,
    provision_distributed,
)
from .erlang import DEFAULT_PORT_CAP, InfeasibleError, erlang_b, erlang_b_reference, min_ports
from .popularity import CatalogModel, approximation_errors, p_unpopular, psi_approx, psi_exact
from .scenario import (
    Scenario,
    ScenarioError,
    ScenarioParseError,
    ScenarioValidationError,
    SimSettings,
    SweepSpec,
    bundled_scenarios,
    load_scenario,
    load_scenario_text,
    scenario_to_toml,
)
from .simulator import (
    ComparisonRecord,
    PoolComparison,
    PoolStats,
    SimConfig,
    SimReport,
    run_sim,
    single_pool_config,
    validate_against_analytic,
)
from .sweep import SweepResult, emit_csv, emit_report, run_sweep
from .units import UnitError, parse_bandwidth, parse_duration

__version__ = "0.1.0"

__all__ = [
    "CatalogModel",
    "CentralizedProvision",
    "ClusterParams",
    "ComparisonRecord",
    "DEFAULT_PORT_CAP",
    "DistributedProvision",
    "InfeasibleError",
    "MessageSizes",
    "PoolComparison",
    "PoolStats",
    "Scenario",
    "ScenarioError",
    "ScenarioParseError",
    "ScenarioValidationError",
    "ServiceProfile",
    "SimConfig",
    "SimReport",
    "SimSettings",
    "SweepResult",
    "SweepSpec",
    "UnitError",
    "approximation_errors",
    "bundled_scenarios",
    "centralized_load",
    "cluster_base_load",
    "distributed_loads",
    "emit_csv",
    "emit_report",
    "erlang_b",
    "erlang_b_reference",
    "inbound_bandwidth",
    "load_scenario",
    "load_scenario_text",
    "min_ports",
    "p_unpopular",
    "parse_bandwidth",
    "parse_duration",
    "provision_centralized",
    "provision_distributed",
    "psi_approx",
    "psi_exact",
    "run_sim",
    "run_sweep",
    "scenario_to_toml",
    "single_pool_config",
    "validate_against_analytic",
]
