"""Word flux across fixed relative-frequency thresholds between decades.

"Above" a threshold means raw coarse-grained frequency >= theta (configurable
to strict >); a crossing needs strict inequality on the departing side, so a
token sitting exactly at theta in both decades never oscillates. Crossings at
thresholds of 1e-5 and below drop calendar-year tokens by default, since year
references would otherwise drown those charts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .corpus import Decade, DecadeTable
from .divergence import pair_divergence_sums
from .errors import EmptyDecade, RankOutOfRange
from .ingest import YEAR_TOKEN_RANGE

__all__ = [
    "ThresholdCrossing",
    "FluxReport",
    "FluxVolumeCell",
    "threshold_flux",
    "flux_volume_series",
    "count_above",
    "rank_threshold_frequency",
    "year_exclusion_default",
]

UPWARD = "upward"
DOWNWARD = "downward"

# Year references are screened out at and below this threshold unless the
# caller decides explicitly.
YEAR_EXCLUSION_MAX_THRESHOLD = 1e-5


def year_exclusion_default(threshold: float) -> bool:
    return threshold <= YEAR_EXCLUSION_MAX_THRESHOLD


@dataclass(frozen=True, slots=True)
class ThresholdCrossing:
    """One token crossing ``threshold`` between two decades."""

    token: str
    f1: float
    f2: float
    threshold: float
    direction: str
    jsd_contribution: float


@dataclass(frozen=True)
class FluxReport:
    """All crossings of one threshold between one decade pair.

    Both direction lists are sorted descending by divergence contribution
    (ties lexicographic). ``percent_of_pair_jsd`` is the share of the pair's
    total divergence accounted for by every crossing token.
    """

    first: Decade
    second: Decade
    threshold: float
    upward: tuple[ThresholdCrossing, ...]
    downward: tuple[ThresholdCrossing, ...]
    percent_of_pair_jsd: float
    pair_jsd: float
    years_excluded: bool

    @property
    def upward_count(self) -> int:
        return len(self.upward)

    @property
    def downward_count(self) -> int:
        return len(self.downward)

    def top(self, k: int | None = None) -> list[ThresholdCrossing]:
        """Both directions merged, ranked by contribution (ties lexicographic)."""
        merged = sorted(
            self.upward + self.downward,
            key=lambda c: (-c.jsd_contribution, c.token),
        )
        return merged if k is None else merged[:k]


@dataclass(frozen=True, slots=True)
class FluxVolumeCell:
    first: Decade
    second: Decade
    threshold: float
    upward: int
    downward: int


def _above(values: np.ndarray, threshold: float, inclusive: bool) -> np.ndarray:
    return values >= threshold if inclusive else values > threshold


def _validate_threshold(threshold: float) -> None:
    if not threshold > 0.0:
        raise ValueError(f"threshold must be positive, got {threshold}")


def _check_nonempty(table: DecadeTable, decade: Decade) -> None:
    if table.mass(decade) <= 0.0:
        raise EmptyDecade(f"decade {decade} has zero total mass")


def threshold_flux(
    table: DecadeTable,
    first: Decade,
    second: Decade,
    threshold: float,
    exclude_years: bool | None = None,
    *,
    above_inclusive: bool = True,
    year_token_range: tuple[int, int] = YEAR_TOKEN_RANGE,
) -> FluxReport:
    """All tokens crossing ``threshold`` between two decades, annotated with
    their divergence contribution on the pair's normalized distributions.

    ``exclude_years=None`` applies the default policy: drop year-like tokens
    at thresholds of 1e-5 and below.
    """
    _validate_threshold(threshold)
    _check_nonempty(table, first)
    _check_nonempty(table, second)
    if exclude_years is None:
        exclude_years = year_exclusion_default(threshold)

    f1 = table.column(first)
    f2 = table.column(second)
    above1 = _above(f1, threshold, above_inclusive)
    above2 = _above(f2, threshold, above_inclusive)
    up_mask = ~above1 & above2
    down_mask = above1 & ~above2
    if exclude_years:
        keep = ~table.year_token_mask(year_token_range)
        up_mask &= keep
        down_mask &= keep

    mass1 = table.mass(first)
    mass2 = table.mass(second)
    total_jsd, _, _ = pair_divergence_sums(table, first, second)

    def crossings(mask: np.ndarray, direction: str) -> tuple[ThresholdCrossing, ...]:
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            return ()
        p = f1[idx] / mass1
        q = f2[idx] / mass2
        values = _kernels.contribution_values(p, q)
        items = [
            ThresholdCrossing(
                table.tokens[i],
                float(f1[i]),
                float(f2[i]),
                threshold,
                direction,
                float(v),
            )
            for i, v in zip(idx, values)
        ]
        items.sort(key=lambda c: (-c.jsd_contribution, c.token))
        return tuple(items)

    upward = crossings(up_mask, UPWARD)
    downward = crossings(down_mask, DOWNWARD)
    crossing_sum = sum(c.jsd_contribution for c in upward) + sum(
        c.jsd_contribution for c in downward
    )
    percent = 100.0 * crossing_sum / total_jsd if total_jsd > 0.0 else 0.0
    return FluxReport(
        first, second, threshold, upward, downward, percent, total_jsd, exclude_years
    )


def flux_volume_series(
    table: DecadeTable,
    thresholds: Sequence[float],
    exclude_years: str = "auto",
    *,
    above_inclusive: bool = True,
    year_token_range: tuple[int, int] = YEAR_TOKEN_RANGE,
) -> list[FluxVolumeCell]:
    """Crossing counts per consecutive decade pair per threshold.

    ``exclude_years`` is "auto" (per-threshold default policy), "on", or "off".
    """
    if exclude_years not in ("auto", "on", "off"):
        raise ValueError("exclude_years must be 'auto', 'on', or 'off'")
    seen = set()
    for threshold in thresholds:
        _validate_threshold(threshold)
        if threshold in seen:
            raise ValueError(f"duplicate threshold {threshold}")
        seen.add(threshold)

    decades = table.decades
    cells = []
    for i in range(len(decades) - 1):
        first, second = decades[i], decades[i + 1]
        f1 = table.column(first)
        f2 = table.column(second)
        for threshold in thresholds:
            above1 = _above(f1, threshold, above_inclusive)
            above2 = _above(f2, threshold, above_inclusive)
            up_mask = ~above1 & above2
            down_mask = above1 & ~above2
            drop_years = (
                year_exclusion_default(threshold)
                if exclude_years == "auto"
                else exclude_years == "on"
            )
            if drop_years:
                keep = ~table.year_token_mask(year_token_range)
                up_mask &= keep
                down_mask &= keep
            cells.append(
                FluxVolumeCell(
                    first,
                    second,
                    threshold,
                    int(up_mask.sum()),
                    int(down_mask.sum()),
                )
            )
    return cells


def count_above(
    table: DecadeTable,
    decade: Decade,
    threshold: float,
    *,
    inclusive: bool = True,
) -> int:
    """Number of tokens at or above the threshold in the decade."""
    _validate_threshold(threshold)
    return int(_above(table.column(decade), threshold, inclusive).sum())


def rank_threshold_frequency(table: DecadeTable, decade: Decade, rank: int) -> float:
    """Raw frequency of the rank-th most frequent token of the decade.

    Ties sit at equal frequencies, so the returned value is well defined
    under the lexicographic tie order used elsewhere.
    """
    column = table.column(decade)
    nonzero = column[column > 0.0]
    if rank < 1 or rank > nonzero.size:
        raise RankOutOfRange(
            f"rank {rank} outside [1, {nonzero.size}] for decade {decade}"
        )
    return float(np.partition(nonzero, nonzero.size - rank)[nonzero.size - rank])
