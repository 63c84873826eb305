"""Erlang-B blocking evaluation and inverse port dimensioning."""

from __future__ import annotations

import math

DEFAULT_PORT_CAP = 1_000_000


class InfeasibleError(Exception):
    """No port count up to the cap meets the blocking target."""


def erlang_b(erlangs: float, ports: int) -> float:
    """Blocking probability of a `ports`-server loss system offered `erlangs`.

    Uses the multiplicative recurrence B(0) = 1, B(s) = A*B(s-1) / (s + A*B(s-1)),
    which stays stable for port counts in the thousands where the factorial
    form overflows.

    With zero ports everything blocks (returns 1.0); with zero load and at
    least one port nothing does (returns 0.0).
    """
    if not math.isfinite(erlangs) or erlangs < 0.0:
        raise ValueError(f"offered load must be finite and >= 0, got {erlangs}")
    if ports < 0:
        raise ValueError(f"port count must be >= 0, got {ports}")
    b = 1.0
    for s in range(1, ports + 1):
        ab = erlangs * b
        b = ab / (s + ab)
    return b


def erlang_b_reference(erlangs: float, ports: int) -> float:
    """Direct-summation Erlang-B, evaluated in log space.

    Independent cross-check of :func:`erlang_b` for the self-check suite; do
    not fold the two together.
    """
    if not math.isfinite(erlangs) or erlangs < 0.0:
        raise ValueError(f"offered load must be finite and >= 0, got {erlangs}")
    if ports < 0:
        raise ValueError(f"port count must be >= 0, got {ports}")
    if erlangs == 0.0:
        return 1.0 if ports == 0 else 0.0
    log_terms = [n * math.log(erlangs) - math.lgamma(n + 1) for n in range(ports + 1)]
    peak = max(log_terms)
    total = sum(math.exp(t - peak) for t in log_terms)
    return math.exp(log_terms[-1] - peak) / total


def min_ports(erlangs: float, target: float, port_cap: int = DEFAULT_PORT_CAP) -> int:
    """Smallest port count whose blocking does not exceed `target`.

    Walks the recurrence upward; blocking is strictly decreasing in the port
    count for positive load, so the first count at or under the target is the
    answer. Zero load needs zero ports.

    Raises InfeasibleError when more than `port_cap` ports would be required,
    which signals a degenerate or mis-scaled scenario rather than silently
    truncating.
    """
    if not math.isfinite(erlangs) or erlangs < 0.0:
        raise ValueError(f"offered load must be finite and >= 0, got {erlangs}")
    if not 0.0 < target < 1.0:
        raise ValueError(f"blocking target must be strictly inside (0, 1), got {target}")
    if port_cap < 0:
        raise ValueError(f"port cap must be >= 0, got {port_cap}")
    if erlangs == 0.0:
        return 0
    b = 1.0
    s = 0
    while b > target:
        if s >= port_cap:
            raise InfeasibleError(
                f"{erlangs} Erlang cannot reach blocking <= {target} "
                f"within {port_cap} ports"
            )
        s += 1
        ab = erlangs * b
        b = ab / (s + ab)
    return s
