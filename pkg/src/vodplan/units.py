"""Unit-suffixed scalar parsing for scenario files.

Every duration and bitrate in a scenario file carries an explicit suffix
("120s", "90min", "7h", "3Mbps"); bare numbers are rejected to keep the
minutes-vs-seconds ambiguity out of the inputs. Canonical units are seconds
and bits/second.
"""

from __future__ import annotations

_DURATION_SCALE = {
    "ms": 1e-3,
    "s": 1.0,
    "min": 60.0,
    "h": 3600.0,
}

_BANDWIDTH_SCALE = {
    "bps": 1.0,
    "kbps": 1e3,
    "Mbps": 1e6,
    "Gbps": 1e9,
}


class UnitError(ValueError):
    """A scalar that needs a unit suffix is missing one or carries an unknown one."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"field '{field}': {message}")


def _parse_suffixed(field: str, raw: object, scales: dict[str, float], kind: str) -> float:
    if isinstance(raw, (int, float)):
        example = "120s" if kind == "duration" else "3Mbps"
        raise UnitError(field, f"bare number {raw!r}; {kind}s need a unit suffix (e.g. '{example}')")
    if not isinstance(raw, str):
        raise UnitError(field, f"expected a unit-suffixed string, got {type(raw).__name__}")
    text = raw.strip()
    for suffix in sorted(scales, key=len, reverse=True):
        if text.endswith(suffix):
            number = text[: -len(suffix)].strip()
            try:
                value = float(number)
            except ValueError:
                raise UnitError(field, f"cannot parse numeric part of {raw!r}") from None
            if value < 0:
                raise UnitError(field, f"{kind} must be >= 0, got {raw!r}")
            return value * scales[suffix]
    known = ", ".join(sorted(scales))
    raise UnitError(field, f"unknown or missing unit suffix in {raw!r} (known: {known})")


def parse_duration(field: str, raw: object) -> float:
    """'120s' / '90min' / '7h' / '250ms' to seconds."""
    return _parse_suffixed(field, raw, _DURATION_SCALE, "duration")


def parse_bandwidth(field: str, raw: object) -> float:
    """'3Mbps' / '800kbps' / '1Gbps' / '64bps' to bits/second."""
    return _parse_suffixed(field, raw, _BANDWIDTH_SCALE, "bandwidth")


def format_duration(seconds: float) -> str:
    """Canonical echo form: exact seconds with the 's' suffix."""
    return f"{seconds!r}s"


def format_bandwidth(bps: float) -> str:
    """Canonical echo form: exact bits/second with the 'bps' suffix."""
    return f"{bps!r}bps"
