"""Scenario files: loading, validation, canonical echo.

A scenario is a TOML document bundling cluster demographics, catalog
popularity, service bitrates, the blocking target, optional simulator
settings, and sweep directives. Every duration and bitrate field carries an
explicit unit suffix; see the units module. Canonical values are seconds and
bits/second throughout.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .capacity import ClusterParams, MessageSizes, ServiceProfile
from .erlang import DEFAULT_PORT_CAP
from .popularity import CatalogModel
from .units import UnitError, format_bandwidth, format_duration, parse_bandwidth, parse_duration


class ScenarioError(Exception):
    """Base for scenario-file problems."""


class ScenarioParseError(ScenarioError):
    """The document does not have the expected structure."""


class ScenarioValidationError(ScenarioError):
    """The document parses but violates an invariant."""


@dataclass(frozen=True)
class SimSettings:
    """Simulator knobs carried by a scenario; all optional."""

    seed: int = 0
    horizon_offers: int | None = None
    horizon_time: float | None = None
    warmup_offers: int | None = None
    warmup_time: float | None = None
    holding: str = "exponential"
    batch_count: int = 20
    multicast_window_s: float | None = None


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter: a dotted path and its (canonicalized) values."""

    parameter: str
    values: tuple


@dataclass(frozen=True)
class Scenario:
    name: str
    architecture: str
    cluster: ClusterParams
    services: tuple[ServiceProfile, ...]
    blocking_target: float
    port_cap: int = DEFAULT_PORT_CAP
    catalog: CatalogModel | None = None
    messages: MessageSizes | None = None
    sim: SimSettings = field(default_factory=SimSettings)
    sweep: tuple[SweepSpec, ...] = ()
    population_mode: str = "fixed_per_cluster"
    meta: tuple[tuple[str, str], ...] = ()


# sweepable dotted paths -> (attribute on the canonical dataclass, value kind)
SWEEPABLE = {
    "cluster.clusters": ("clusters", "int"),
    "cluster.households": ("households", "int"),
    "cluster.penetration": ("penetration", "float"),
    "cluster.normal_rate": ("normal_rate", "float"),
    "cluster.interactive_rate": ("interactive_rate", "float"),
    "cluster.normal_hold": ("normal_hold_s", "duration"),
    "cluster.interactive_hold": ("interactive_hold_s", "duration"),
    "cluster.peak_period": ("peak_period_s", "duration"),
    "cluster.multicast_factor": ("multicast_factor", "float"),
    "catalog.total_movies": ("total_movies", "int"),
    "catalog.popular_count": ("popular_count", "int"),
    "catalog.zipf_exponent": ("zipf_exponent", "float"),
    "provisioning.blocking_target": ("blocking_target", "float"),
}


def _require_table(doc: dict, key: str) -> dict:
    value = doc.get(key)
    if value is None:
        raise ScenarioParseError(f"missing required table [{key}]")
    if not isinstance(value, dict):
        raise ScenarioParseError(f"[{key}] must be a table")
    return dict(value)


def _take(table: dict, table_name: str, key: str, required: bool = True, default=None):
    if key not in table:
        if required:
            raise ScenarioParseError(f"missing required field {table_name}.{key}")
        return default
    return table.pop(key)


def _reject_unknown(table: dict, table_name: str) -> None:
    if table:
        names = ", ".join(f"{table_name}.{k}" for k in sorted(table))
        raise ScenarioParseError(f"unknown field(s): {names}")


def _as_int(field_name: str, value, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioParseError(f"field '{field_name}' must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ScenarioValidationError(f"field '{field_name}' must be >= {minimum}, got {value}")
    return value


def _as_float(field_name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioParseError(f"field '{field_name}' must be a number, got {value!r}")
    return float(value)


def _as_str(field_name: str, value, choices: tuple[str, ...] | None = None) -> str:
    if not isinstance(value, str):
        raise ScenarioParseError(f"field '{field_name}' must be a string, got {value!r}")
    if choices is not None and value not in choices:
        raise ScenarioValidationError(
            f"field '{field_name}' must be one of {', '.join(choices)}; got {value!r}"
        )
    return value


def _coerce_sweep_value(path: str, kind: str, value, where: str):
    if kind == "int":
        return _as_int(f"{where} ({path})", value)
    if kind == "float":
        return _as_float(f"{where} ({path})", value)
    return parse_duration(f"{where} ({path})", value)


def _parse_cluster(table: dict) -> ClusterParams:
    t = dict(table)
    kwargs = dict(
        clusters=_as_int("cluster.clusters", _take(t, "cluster", "clusters")),
        households=_as_int("cluster.households", _take(t, "cluster", "households")),
        penetration=_as_float("cluster.penetration", _take(t, "cluster", "penetration")),
        normal_rate=_as_float("cluster.normal_rate", _take(t, "cluster", "normal_rate")),
        interactive_rate=_as_float(
            "cluster.interactive_rate", _take(t, "cluster", "interactive_rate")
        ),
        normal_hold_s=parse_duration("cluster.normal_hold", _take(t, "cluster", "normal_hold")),
        interactive_hold_s=parse_duration(
            "cluster.interactive_hold", _take(t, "cluster", "interactive_hold")
        ),
        peak_period_s=parse_duration("cluster.peak_period", _take(t, "cluster", "peak_period")),
        multicast_factor=_as_float(
            "cluster.multicast_factor", _take(t, "cluster", "multicast_factor")
        ),
    )
    _reject_unknown(t, "cluster")
    try:
        return ClusterParams(**kwargs)
    except ValueError as e:
        raise ScenarioValidationError(f"[cluster] {e}") from None


def _parse_catalog(table: dict) -> CatalogModel:
    t = dict(table)
    kwargs = dict(
        total_movies=_as_int("catalog.total_movies", _take(t, "catalog", "total_movies")),
        popular_count=_as_int("catalog.popular_count", _take(t, "catalog", "popular_count")),
        zipf_exponent=_as_float("catalog.zipf_exponent", _take(t, "catalog", "zipf_exponent")),
    )
    _reject_unknown(t, "catalog")
    try:
        return CatalogModel(**kwargs)
    except ValueError as e:
        raise ScenarioValidationError(f"[catalog] {e}") from None


def _parse_services(doc: dict) -> tuple[ServiceProfile, ...]:
    raw = doc.get("service")
    if raw is None:
        raise ScenarioParseError("missing required table [service] (or array [[service]])")
    entries = raw if isinstance(raw, list) else [raw]
    services = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ScenarioParseError(f"service[{i}] must be a table")
        t = dict(entry)
        label = _as_str(f"service[{i}].label", _take(t, f"service[{i}]", "label", required=False, default="custom"))
        rate = parse_bandwidth(f"service[{i}].stream_rate", _take(t, f"service[{i}]", "stream_rate"))
        _reject_unknown(t, f"service[{i}]")
        try:
            services.append(ServiceProfile(stream_rate_bps=rate, label=label))
        except ValueError as e:
            raise ScenarioValidationError(f"service[{i}]: {e}") from None
    if not services:
        raise ScenarioParseError("at least one [[service]] entry is required")
    labels = [s.label for s in services]
    if len(set(labels)) != len(labels):
        raise ScenarioValidationError("service labels must be unique")
    return tuple(services)


def _parse_messages(table: dict) -> MessageSizes:
    t = dict(table)
    kwargs = dict(
        normal_bits=_as_int("messages.normal_bits", _take(t, "messages", "normal_bits")),
        interactive_bits=_as_int(
            "messages.interactive_bits", _take(t, "messages", "interactive_bits")
        ),
    )
    _reject_unknown(t, "messages")
    try:
        return MessageSizes(**kwargs)
    except ValueError as e:
        raise ScenarioValidationError(f"[messages] {e}") from None


def _parse_sim(table: dict) -> SimSettings:
    t = dict(table)
    seed = _as_int("sim.seed", _take(t, "sim", "seed", required=False, default=0), minimum=0)
    horizon_offers = _take(t, "sim", "horizon_offers", required=False)
    if horizon_offers is not None:
        horizon_offers = _as_int("sim.horizon_offers", horizon_offers, minimum=1)
    horizon_time_raw = _take(t, "sim", "horizon_time", required=False)
    horizon_time = (
        parse_duration("sim.horizon_time", horizon_time_raw) if horizon_time_raw is not None else None
    )
    warmup_offers = _take(t, "sim", "warmup_offers", required=False)
    if warmup_offers is not None:
        warmup_offers = _as_int("sim.warmup_offers", warmup_offers, minimum=0)
    warmup_time_raw = _take(t, "sim", "warmup_time", required=False)
    warmup_time = (
        parse_duration("sim.warmup_time", warmup_time_raw) if warmup_time_raw is not None else None
    )
    holding = _as_str(
        "sim.holding",
        _take(t, "sim", "holding", required=False, default="exponential"),
        choices=("exponential", "deterministic"),
    )
    batch_count = _as_int(
        "sim.batches", _take(t, "sim", "batches", required=False, default=20), minimum=2
    )
    window_raw = _take(t, "sim", "multicast_window", required=False)
    window = (
        parse_duration("sim.multicast_window", window_raw) if window_raw is not None else None
    )
    _reject_unknown(t, "sim")
    if horizon_offers is not None and horizon_time is not None:
        raise ScenarioValidationError("set at most one of sim.horizon_offers / sim.horizon_time")
    if warmup_offers is not None and horizon_offers is None:
        raise ScenarioValidationError("sim.warmup_offers needs sim.horizon_offers")
    if warmup_time is not None and horizon_time is None:
        raise ScenarioValidationError("sim.warmup_time needs sim.horizon_time")
    if (
        horizon_offers is not None
        and warmup_offers is not None
        and warmup_offers >= horizon_offers
    ):
        raise ScenarioValidationError("sim.warmup_offers must be strictly below sim.horizon_offers")
    if horizon_time is not None and warmup_time is not None and warmup_time >= horizon_time:
        raise ScenarioValidationError("sim.warmup_time must be strictly below sim.horizon_time")
    return SimSettings(
        seed=seed,
        horizon_offers=horizon_offers,
        horizon_time=horizon_time,
        warmup_offers=warmup_offers,
        warmup_time=warmup_time,
        holding=holding,
        batch_count=batch_count,
        multicast_window_s=window,
    )


def _parse_sweep(doc: dict, has_catalog: bool, population_mode: str) -> tuple[SweepSpec, ...]:
    raw = doc.get("sweep")
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise ScenarioParseError("[[sweep]] must be an array of tables")
    specs = []
    seen = set()
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise ScenarioParseError(f"sweep[{i}] must be a table")
        t = dict(entry)
        path = _as_str(f"sweep[{i}].parameter", _take(t, f"sweep[{i}]", "parameter"))
        values = _take(t, f"sweep[{i}]", "values")
        _reject_unknown(t, f"sweep[{i}]")
        if path not in SWEEPABLE:
            raise ScenarioValidationError(
                f"sweep[{i}].parameter {path!r} is not a sweepable field "
                f"(known: {', '.join(sorted(SWEEPABLE))})"
            )
        if path in seen:
            raise ScenarioValidationError(f"sweep parameter {path!r} listed twice")
        seen.add(path)
        if path.startswith("catalog.") and not has_catalog:
            raise ScenarioValidationError(f"sweep over {path!r} needs a [catalog] table")
        if path == "cluster.households" and population_mode == "fixed_total":
            raise ScenarioValidationError(
                "cluster.households cannot be swept in fixed_total mode "
                "(households are derived from the cluster count)"
            )
        if not isinstance(values, list) or not values:
            raise ScenarioParseError(f"sweep[{i}].values must be a non-empty array")
        _, kind = SWEEPABLE[path]
        coerced = tuple(
            _coerce_sweep_value(path, kind, v, f"sweep[{i}].values[{j}]")
            for j, v in enumerate(values)
        )
        specs.append(SweepSpec(parameter=path, values=coerced))
    return tuple(specs)


def _parse_meta(table: dict) -> tuple[tuple[str, str], ...]:
    out = []
    for key in sorted(table):
        value = table[key]
        if not isinstance(value, str):
            raise ScenarioParseError(f"meta.{key} must be a string (informational notes only)")
        out.append((key, value))
    return tuple(out)


def load_scenario_text(text: str) -> Scenario:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ScenarioParseError(f"TOML parse error: {e}") from None

    doc = dict(doc)
    name = _as_str("name", _take(doc, "<top level>", "name"))
    architecture = _as_str(
        "architecture",
        _take(doc, "<top level>", "architecture"),
        choices=("centralized", "distributed"),
    )
    population_mode = _as_str(
        "population_mode",
        _take(doc, "<top level>", "population_mode", required=False, default="fixed_per_cluster"),
        choices=("fixed_per_cluster", "fixed_total"),
    )

    cluster = _parse_cluster(_require_table(doc, "cluster"))
    doc.pop("cluster")

    catalog = None
    if "catalog" in doc:
        catalog = _parse_catalog(_require_table(doc, "catalog"))
        doc.pop("catalog")
    if architecture == "distributed" and catalog is None:
        raise ScenarioValidationError("distributed scenarios need a [catalog] table")

    services = _parse_services(doc)
    doc.pop("service")

    provisioning = _require_table(doc, "provisioning")
    doc.pop("provisioning")
    blocking_target = _as_float(
        "provisioning.blocking_target", _take(provisioning, "provisioning", "blocking_target")
    )
    if not 0.0 < blocking_target < 1.0:
        raise ScenarioValidationError(
            f"field 'provisioning.blocking_target' must be strictly inside (0, 1), "
            f"got {blocking_target}"
        )
    port_cap = _as_int(
        "provisioning.port_cap",
        _take(provisioning, "provisioning", "port_cap", required=False, default=DEFAULT_PORT_CAP),
        minimum=0,
    )
    _reject_unknown(provisioning, "provisioning")

    messages = None
    if "messages" in doc:
        messages = _parse_messages(_require_table(doc, "messages"))
        doc.pop("messages")

    sim = SimSettings()
    if "sim" in doc:
        sim = _parse_sim(_require_table(doc, "sim"))
        doc.pop("sim")

    sweep = _parse_sweep(doc, catalog is not None, population_mode)
    doc.pop("sweep", None)

    meta = ()
    if "meta" in doc:
        meta = _parse_meta(_require_table(doc, "meta"))
        doc.pop("meta")

    _reject_unknown(doc, "<top level>")

    return Scenario(
        name=name,
        architecture=architecture,
        cluster=cluster,
        services=services,
        blocking_target=blocking_target,
        port_cap=port_cap,
        catalog=catalog,
        messages=messages,
        sim=sim,
        sweep=sweep,
        population_mode=population_mode,
        meta=meta,
    )


def bundled_scenarios() -> list[str]:
    """Names of the scenarios shipped inside the package."""
    root = resources.files("vodplan").joinpath("scenarios")
    return sorted(p.name[: -len(".toml")] for p in root.iterdir() if p.name.endswith(".toml"))


def load_scenario(path_or_name: str | Path) -> Scenario:
    """Load a scenario from a file path, or by bundled name if no file exists."""
    p = Path(path_or_name)
    if p.exists():
        return load_scenario_text(p.read_text(encoding="utf-8"))
    candidate = resources.files("vodplan").joinpath("scenarios", f"{path_or_name}.toml")
    if candidate.is_file():
        return load_scenario_text(candidate.read_text(encoding="utf-8"))
    raise ScenarioParseError(
        f"scenario {path_or_name!r} is neither a file nor a bundled name "
        f"(bundled: {', '.join(bundled_scenarios())})"
    )


def _toml_str(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _toml_scalar(value) -> str:
    if isinstance(value, str):
        return _toml_str(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def scenario_to_toml(scenario: Scenario) -> str:
    """Canonical echo of a scenario: reloading the text yields an equal value.

    All durations come back in exact seconds and bitrates in exact bits/second,
    so the echo is unit-canonical rather than a copy of the source file.
    """
    s = scenario
    lines = [
        f"name = {_toml_str(s.name)}",
        f"architecture = {_toml_str(s.architecture)}",
        f"population_mode = {_toml_str(s.population_mode)}",
        "",
        "[cluster]",
        f"clusters = {s.cluster.clusters}",
        f"households = {s.cluster.households}",
        f"penetration = {_toml_scalar(s.cluster.penetration)}",
        f"normal_rate = {_toml_scalar(s.cluster.normal_rate)}",
        f"interactive_rate = {_toml_scalar(s.cluster.interactive_rate)}",
        f"normal_hold = {_toml_str(format_duration(s.cluster.normal_hold_s))}",
        f"interactive_hold = {_toml_str(format_duration(s.cluster.interactive_hold_s))}",
        f"peak_period = {_toml_str(format_duration(s.cluster.peak_period_s))}",
        f"multicast_factor = {_toml_scalar(s.cluster.multicast_factor)}",
    ]
    if s.catalog is not None:
        lines += [
            "",
            "[catalog]",
            f"total_movies = {s.catalog.total_movies}",
            f"popular_count = {s.catalog.popular_count}",
            f"zipf_exponent = {_toml_scalar(s.catalog.zipf_exponent)}",
        ]
    for svc in s.services:
        lines += [
            "",
            "[[service]]",
            f"label = {_toml_str(svc.label)}",
            f"stream_rate = {_toml_str(format_bandwidth(svc.stream_rate_bps))}",
        ]
    lines += [
        "",
        "[provisioning]",
        f"blocking_target = {_toml_scalar(s.blocking_target)}",
        f"port_cap = {s.port_cap}",
    ]
    if s.messages is not None:
        lines += [
            "",
            "[messages]",
            f"normal_bits = {s.messages.normal_bits}",
            f"interactive_bits = {s.messages.interactive_bits}",
        ]
    sim = s.sim
    sim_lines = [f"seed = {sim.seed}"]
    if sim.horizon_offers is not None:
        sim_lines.append(f"horizon_offers = {sim.horizon_offers}")
    if sim.horizon_time is not None:
        sim_lines.append(f"horizon_time = {_toml_str(format_duration(sim.horizon_time))}")
    if sim.warmup_offers is not None:
        sim_lines.append(f"warmup_offers = {sim.warmup_offers}")
    if sim.warmup_time is not None:
        sim_lines.append(f"warmup_time = {_toml_str(format_duration(sim.warmup_time))}")
    sim_lines.append(f"holding = {_toml_str(sim.holding)}")
    sim_lines.append(f"batches = {sim.batch_count}")
    if sim.multicast_window_s is not None:
        sim_lines.append(
            f"multicast_window = {_toml_str(format_duration(sim.multicast_window_s))}"
        )
    lines += ["", "[sim]"] + sim_lines
    for spec in s.sweep:
        _, kind = SWEEPABLE[spec.parameter]
        if kind == "duration":
            rendered = ", ".join(_toml_str(format_duration(v)) for v in spec.values)
        else:
            rendered = ", ".join(_toml_scalar(v) for v in spec.values)
        lines += [
            "",
            "[[sweep]]",
            f"parameter = {_toml_str(spec.parameter)}",
            f"values = [{rendered}]",
        ]
    if s.meta:
        lines += ["", "[meta]"]
        lines += [f"{key} = {_toml_str(value)}" for key, value in s.meta]
    return "\n".join(lines) + "\n"
