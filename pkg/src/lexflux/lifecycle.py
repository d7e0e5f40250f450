"""Word birth/death rates under an explicit observation window.

A word's birth (death) decade is the first (last) decade inside the window
where its frequency reaches a fixed fraction of its median frequency, the
median being taken over its nonzero decades within that window. Words seen in
fewer than two window decades are excluded, as are words already present
before the window starts (when the table reaches back that far). Rates
normalize counts by the decade's full vocabulary size.

The whole point of the endpoint experiment is that this measurement is not
window-invariant: every word still alive at the window's final decade has its
"death" recorded there, so the terminal pile-up relocates with the endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import Decade, DecadeTable
from .errors import AbsentToken, EndpointOutOfRange, WindowTooSmall

__all__ = [
    "LifecycleConfig",
    "LifecycleResult",
    "median_frequency",
    "birth_death",
    "boundary_experiment",
]

# Rows per block when computing per-token medians, to bound the transient
# sort buffer on multi-million-token tables.
_BLOCK_ROWS = 1 << 18


@dataclass(frozen=True)
class LifecycleConfig:
    """Window and thresholds for a birth/death measurement.

    ``median_fraction`` defaults to 1/20 (1/10 is the common alternative).
    ``strict_above`` switches the threshold comparison from >= to >.
    ``exclude_pre_window`` drops words already seen before the window when the
    table extends earlier; it is vacuous otherwise (see result metadata).
    """

    window: tuple[Decade, Decade]
    median_fraction: float = 0.05
    exclude_pre_window: bool = True
    strict_above: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.median_fraction < 1.0:
            raise ValueError("median_fraction must be in (0, 1)")
        if self.window[0] > self.window[1]:
            raise ValueError("window start after window end")


@dataclass(frozen=True)
class LifecycleResult:
    """Per-decade birth/death counts and rates for one window."""

    window: tuple[Decade, Decade]
    median_fraction: float
    decades: tuple[Decade, ...]
    births: np.ndarray
    deaths: np.ndarray
    unique_words: np.ndarray
    birth_rates: np.ndarray
    death_rates: np.ndarray
    eligible_tokens: int
    pre_window_exclusion_vacuous: bool

    def rows(self):
        """(decade, births, deaths, unique_words, birth_rate, death_rate) rows."""
        for i, decade in enumerate(self.decades):
            yield (
                decade,
                int(self.births[i]),
                int(self.deaths[i]),
                int(self.unique_words[i]),
                float(self.birth_rates[i]),
                float(self.death_rates[i]),
            )


def median_frequency(
    table: DecadeTable, token: str, window: tuple[Decade, Decade]
) -> float:
    """Median of the token's nonzero decade frequencies within the window.

    Even-count medians are the mean of the two middle values.
    """
    i0 = table.decade_index(window[0])
    i1 = table.decade_index(window[1])
    series = table.token_series(token)[i0 : i1 + 1]
    nonzero = series[series > 0.0]
    if nonzero.size == 0:
        raise AbsentToken(f"token {token!r} has no nonzero decade in the window")
    return float(np.median(nonzero))


def _window_matrix(
    table: DecadeTable, window: tuple[Decade, Decade]
) -> tuple[np.ndarray, int, int]:
    i0 = table.decade_index(window[0])
    i1 = table.decade_index(window[1])
    return table.matrix[:, i0 : i1 + 1], i0, i1


def _nonzero_medians(block: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Per-row median over nonzero entries; rows with no nonzero give nan."""
    n, width = block.shape
    ordered = np.sort(block, axis=1)  # zeros gather on the left
    rows = np.arange(n)
    safe = np.maximum(counts, 1)
    lo = width - safe + (safe - 1) // 2
    hi = width - safe + safe // 2
    med = 0.5 * (ordered[rows, lo] + ordered[rows, hi])
    med[counts == 0] = np.nan
    return med


def birth_death(table: DecadeTable, config: LifecycleConfig) -> LifecycleResult:
    """Count births and deaths per decade of the window and normalize them.

    A token is eligible when it is nonzero in at least two window decades and
    (with pre-window exclusion) absent from every earlier table decade. Birth
    is its first window decade at or above ``median_fraction`` times its
    window median; death is the last.
    """
    first, last = config.window
    window_decades = tuple(
        d for d in table.decades if first <= d <= last
    )
    span = (last.start_year - first.start_year) // 10 + 1
    if len(window_decades) != span:
        raise EndpointOutOfRange(
            f"window {first}..{last} not fully inside table range "
            f"{table.decades[0]}..{table.decades[-1]}"
        )
    if span < 2:
        raise WindowTooSmall("window must span at least two decades")

    matrix, i0, _ = _window_matrix(table, config.window)
    width = matrix.shape[1]
    pre_vacuous = i0 == 0

    births = np.zeros(width, dtype=np.int64)
    deaths = np.zeros(width, dtype=np.int64)
    eligible_total = 0

    for start in range(0, matrix.shape[0], _BLOCK_ROWS):
        block = matrix[start : start + _BLOCK_ROWS]
        nonzero = block > 0.0
        counts = nonzero.sum(axis=1)
        eligible = counts >= 2
        if config.exclude_pre_window and not pre_vacuous:
            pre = table.matrix[start : start + _BLOCK_ROWS, :i0]
            eligible &= ~pre.any(axis=1)
        if not eligible.any():
            continue
        sub = block[eligible]
        medians = _nonzero_medians(sub, counts[eligible])
        thresholds = config.median_fraction * medians
        above = (
            sub > thresholds[:, None]
            if config.strict_above
            else sub >= thresholds[:, None]
        )
        # every eligible row clears its threshold somewhere: the row maximum
        # is never below a proper fraction of the median
        birth_idx = above.argmax(axis=1)
        death_idx = width - 1 - above[:, ::-1].argmax(axis=1)
        births += np.bincount(birth_idx, minlength=width)
        deaths += np.bincount(death_idx, minlength=width)
        eligible_total += int(eligible.sum())

    unique = np.array(
        [table.vocabulary_size(d) for d in window_decades], dtype=np.int64
    )
    with np.errstate(invalid="ignore"):
        birth_rates = np.where(unique > 0, births / np.maximum(unique, 1), 0.0)
        death_rates = np.where(unique > 0, deaths / np.maximum(unique, 1), 0.0)
    return LifecycleResult(
        config.window,
        config.median_fraction,
        window_decades,
        births,
        deaths,
        unique,
        birth_rates,
        death_rates,
        eligible_total,
        pre_vacuous,
    )


def boundary_experiment(
    table: DecadeTable,
    endpoints: Sequence[Decade],
    *,
    window_start: Decade | None = None,
    median_fraction: float = 0.05,
    exclude_pre_window: bool = True,
) -> dict[Decade, LifecycleResult]:
    """Rerun birth_death with the window truncated at each endpoint.

    Medians are recomputed per truncated window, so the series show how the
    measurement depends on where the observation ends.
    """
    start = window_start if window_start is not None else table.decades[0]
    results: dict[Decade, LifecycleResult] = {}
    for endpoint in endpoints:
        if endpoint not in table.decades:
            raise EndpointOutOfRange(f"endpoint {endpoint} outside table range")
        config = LifecycleConfig(
            window=(start, endpoint),
            median_fraction=median_fraction,
            exclude_pre_window=exclude_pre_window,
        )
        results[endpoint] = birth_death(table, config)
    return results
