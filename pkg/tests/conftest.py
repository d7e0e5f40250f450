from __future__ import annotations

import pytest

from lexflux import CorpusTotals, Decade, YearRecord, build_decade_table


def records_from_counts(counts: dict[str, dict[int, int]]) -> list[YearRecord]:
    """counts: token -> {year: match_count}; volume defaults to 1."""
    records = []
    for token, by_year in counts.items():
        for year, mc in sorted(by_year.items()):
            records.append(YearRecord(token, year, mc, min(1, mc)))
    return records


def totals_for_years(years, total: int = 1_000_000) -> CorpusTotals:
    return CorpusTotals.from_mapping({y: (total, total // 100 + 1) for y in years})


def make_table(
    counts: dict[str, dict[int, int]],
    first: int,
    last: int,
    total_per_year: int = 1_000_000,
):
    """Build a table from per-token yearly counts with a flat denominator."""
    years = range(first, last + 10)
    totals = totals_for_years(years, total_per_year)
    return build_decade_table(
        records_from_counts(counts), totals, Decade(first), Decade(last)
    )


@pytest.fixture
def flat_total() -> int:
    return 1_000_000
