"""Zipf-like title popularity: popular-mass and unpopular-request probabilities.

A catalog of N titles is ranked by popularity; the request probability of the
i-th title is proportional to 1/i^a with 0 < a < 1. The top k titles are the
"popular" set that local proxy servers hold in full.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CatalogModel:
    total_movies: int
    popular_count: int
    zipf_exponent: float

    def __post_init__(self) -> None:
        if self.total_movies < 1:
            raise ValueError(f"total_movies must be >= 1, got {self.total_movies}")
        if not 1 <= self.popular_count <= self.total_movies:
            raise ValueError(
                f"popular_count must be in [1, total_movies], got "
                f"{self.popular_count} of {self.total_movies}"
            )
        if not 0.0 < self.zipf_exponent < 1.0:
            raise ValueError(
                f"zipf_exponent must be strictly between 0 and 1, got {self.zipf_exponent}"
            )


def psi_exact(catalog: CatalogModel) -> float:
    """Probability that a request hits one of the popular titles.

    Normalizes the rank weights over the full catalog by direct summation, so
    this is a genuinely independent check on :func:`psi_approx` (which bakes
    in an asymptotic normalization).
    """
    weights = np.arange(1, catalog.total_movies + 1, dtype=float) ** (-catalog.zipf_exponent)
    return float(weights[: catalog.popular_count].sum() / weights.sum())


def psi_approx(catalog: CatalogModel) -> float:
    """Closed-form popular-mass approximation (k/N)^(1-a)."""
    return (catalog.popular_count / catalog.total_movies) ** (1.0 - catalog.zipf_exponent)


def p_unpopular(catalog: CatalogModel) -> float:
    """Probability that a request targets a title outside the popular set.

    Float complement of :func:`psi_approx`; the two always sum to exactly 1.0.
    """
    return 1.0 - psi_approx(catalog)


def approximation_errors(
    total_movies: int,
    zipf_exponent: float,
    popular_counts: list[int] | None = None,
) -> list[tuple[int, float]]:
    """|psi_exact - psi_approx| at each popular-set size.

    Default grid spans N/100 up to N. Used by the approximation-quality
    report in the self-check suite; the error collapses to 0 at k = N.
    """
    if popular_counts is None:
        fractions = (0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0)
        popular_counts = sorted({max(1, round(f * total_movies)) for f in fractions})
    weights = np.arange(1, total_movies + 1, dtype=float) ** (-zipf_exponent)
    denom = weights.sum()
    out = []
    for k in popular_counts:
        catalog = CatalogModel(total_movies, k, zipf_exponent)
        exact = float(weights[:k].sum() / denom)
        out.append((k, abs(exact - psi_approx(catalog))))
    return out
