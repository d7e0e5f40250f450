from __future__ import annotations

import math

import numpy as np
import pytest

from lexflux import (
    Decade,
    count_above,
    flux_volume_series,
    normalize,
    rank_threshold_frequency,
    threshold_flux,
    word_contribution,
)
from lexflux.errors import EmptyDecade, RankOutOfRange
from lexflux.flux import year_exclusion_default

from conftest import make_table


class TestThresholdFlux:
    def test_downward_crossing(self):
        # f1 = 2e-4, f2 = 5e-5 around theta = 1e-4
        table = make_table(
            {"x": {1820: 2000, 1830: 500}, "pad": {1820: 10, 1830: 10}},
            1820,
            1830,
            1_000_000,
        )
        report = threshold_flux(table, Decade(1820), Decade(1830), 1e-4)
        assert [c.token for c in report.downward] == ["x"]
        assert report.upward == ()
        assert report.downward[0].f1 == pytest.approx(2e-4)
        assert report.downward[0].f2 == pytest.approx(5e-5)

    def test_boundary_rule_half_open(self):
        # sitting exactly at theta on both sides never counts as a crossing;
        # arriving exactly at theta does
        table = make_table(
            {
                "stay": {1820: 1000, 1830: 1000},
                "arrive": {1820: 999, 1830: 1000},
                "pad": {1820: 1, 1830: 1},
            },
            1820,
            1830,
            10_000_000,
        )
        theta = table.frequency("arrive", Decade(1830))  # float-exact boundary
        assert theta == table.frequency("stay", Decade(1820))
        report = threshold_flux(table, Decade(1820), Decade(1830), theta)
        assert [c.token for c in report.upward] == ["arrive"]
        assert report.downward == ()

    def test_strict_rule_flips_boundary(self):
        table = make_table(
            {"arrive": {1820: 999, 1830: 1000}, "pad": {1820: 1, 1830: 1}},
            1820,
            1830,
            10_000_000,
        )
        theta = table.frequency("arrive", Decade(1830))
        report = threshold_flux(
            table, Decade(1820), Decade(1830), theta, above_inclusive=False
        )
        assert report.upward == ()

    def test_direction_partition(self):
        table = make_table(
            {
                "up": {1820: 10, 1830: 900},
                "down": {1820: 900, 1830: 10},
                "flat": {1820: 500, 1830: 500},
            },
            1820,
            1830,
            1_000_000,
        )
        report = threshold_flux(table, Decade(1820), Decade(1830), 5e-5)
        up = {c.token for c in report.upward}
        down = {c.token for c in report.downward}
        assert up & down == set()
        assert up == {"up"} and down == {"down"}

    def test_year_exclusion_policy(self):
        assert year_exclusion_default(1e-5)
        assert year_exclusion_default(1e-7)
        assert not year_exclusion_default(1e-4)

    def test_year_tokens_dropped_below_policy_threshold(self):
        table = make_table(
            {"1984": {1830: 900}, "word": {1830: 900}, "pad": {1820: 10, 1830: 10}},
            1820,
            1830,
            1_000_000,
        )
        auto = threshold_flux(table, Decade(1820), Decade(1830), 1e-5)
        assert {c.token for c in auto.upward} == {"word"}
        off = threshold_flux(table, Decade(1820), Decade(1830), 1e-5, exclude_years=False)
        assert {c.token for c in off.upward} == {"word", "1984"}
        # exclusion soundness: filtered report is a subset
        assert {c.token for c in auto.upward} <= {c.token for c in off.upward}

    def test_contribution_matches_divergence_module(self):
        table = make_table(
            {"up": {1820: 10, 1830: 900}, "pad": {1820: 500, 1830: 500}},
            1820,
            1830,
            1_000_000,
        )
        report = threshold_flux(table, Decade(1820), Decade(1830), 5e-5)
        crossing = report.upward[0]
        p = normalize(table, Decade(1820)).prob("up")
        q = normalize(table, Decade(1830)).prob("up")
        assert crossing.jsd_contribution == pytest.approx(
            word_contribution(p, q).value, rel=1e-12
        )

    def test_percent_of_pair_jsd_bounds(self):
        table = make_table(
            {"up": {1820: 10, 1830: 900}, "pad": {1820: 500, 1830: 480}},
            1820,
            1830,
            1_000_000,
        )
        report = threshold_flux(table, Decade(1820), Decade(1830), 5e-5)
        assert 0.0 <= report.percent_of_pair_jsd <= 100.0

    def test_sorted_by_contribution(self):
        table = make_table(
            {
                "big": {1820: 10, 1830: 5000},
                "small": {1820: 10, 1830: 600},
                "pad": {1820: 500, 1830: 500},
            },
            1820,
            1830,
            1_000_000,
        )
        report = threshold_flux(table, Decade(1820), Decade(1830), 5e-5)
        values = [c.jsd_contribution for c in report.upward]
        assert values == sorted(values, reverse=True)
        assert report.top(1)[0].token == "big"

    def test_empty_decade_rejected(self):
        table = make_table({"a": {1820: 5}}, 1820, 1830)
        with pytest.raises(EmptyDecade):
            threshold_flux(table, Decade(1820), Decade(1830), 1e-5)

    def test_bad_threshold(self):
        table = make_table({"a": {1820: 5, 1830: 5}}, 1820, 1830)
        with pytest.raises(ValueError):
            threshold_flux(table, Decade(1820), Decade(1830), 0.0)


class TestFluxVolumes:
    def test_stationary_table_has_no_flux(self):
        table = make_table(
            {"a": {1820: 100, 1830: 100, 1840: 100}, "b": {1820: 7, 1830: 7, 1840: 7}},
            1820,
            1840,
            1_000_000,
        )
        cells = flux_volume_series(table, [1e-4, 1e-5, 1e-6])
        assert all(c.upward == 0 and c.downward == 0 for c in cells)

    def test_k_raised_tokens_counted(self):
        counts = {f"w{i}": {1820: 10, 1830: 900} for i in range(5)}
        counts["pad"] = {1820: 500, 1830: 500}
        table = make_table(counts, 1820, 1830, 1_000_000)
        cells = flux_volume_series(table, [5e-5])
        assert cells[0].upward == 5
        assert cells[0].downward == 0

    def test_duplicate_threshold_rejected(self):
        table = make_table({"a": {1820: 5, 1830: 5}}, 1820, 1830)
        with pytest.raises(ValueError):
            flux_volume_series(table, [1e-4, 1e-4])

    def test_exclude_years_modes(self):
        table = make_table(
            {"1984": {1820: 10, 1830: 900}, "pad": {1820: 500, 1830: 500}},
            1820,
            1830,
            1_000_000,
        )
        on = flux_volume_series(table, [5e-5], "on")
        off = flux_volume_series(table, [5e-5], "off")
        assert on[0].upward == 0
        assert off[0].upward == 1


class TestCountAbove:
    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(3)
        counts = {
            f"w{i}": {1820: int(c)}
            for i, c in enumerate(rng.integers(1, 10_000, size=50))
        }
        table = make_table(counts, 1820, 1820, 1_000_000)
        thresholds = sorted(10.0 ** -np.linspace(3, 8, 12))
        values = [count_above(table, Decade(1820), t) for t in thresholds]
        assert values == sorted(values, reverse=True)

    def test_empty_decade_counts_zero(self):
        table = make_table({"a": {1820: 5}}, 1820, 1830)
        assert count_above(table, Decade(1830), 1e-9) == 0

    def test_threshold_above_max(self):
        table = make_table({"a": {1820: 5}}, 1820, 1820, 1000)
        assert count_above(table, Decade(1820), 0.9) == 0

    def test_inclusive_boundary(self):
        table = make_table({"a": {1820: 1000}}, 1820, 1820, 1_000_000)
        exact = 1000 / 1_000_000 / 10
        assert count_above(table, Decade(1820), exact) == 1
        assert count_above(table, Decade(1820), exact, inclusive=False) == 0


class TestRankThreshold:
    def test_exact_zipf_matches_harmonic_oracle(self):
        # exact-Zipf decade column, rank 10 -> (1/10)/H_n
        from lexflux import DecadeTable

        n = 100_000
        harmonic = math.fsum(1.0 / k for k in range(1, n + 1))
        freqs = np.array([(1.0 / k) / harmonic for k in range(1, n + 1)])
        tokens = [f"w{k:06d}" for k in range(1, n + 1)]  # already sorted
        table = DecadeTable((Decade(1820),), tokens, freqs[:, None])
        expected = (1.0 / 10) / harmonic
        assert rank_threshold_frequency(table, Decade(1820), 10) == pytest.approx(
            expected, rel=1e-12
        )

    def test_stationary_zipf_build_matches_harmonic_oracle(self):
        # same relation through the full build, desk scale
        n = 1000
        scale = 10**9
        counts = {
            f"w{k:04d}": {y: round(scale / k) for y in range(1820, 1830)}
            for k in range(1, n + 1)
        }
        total = sum(round(scale / k) for k in range(1, n + 1))
        table = make_table(counts, 1820, 1820, total)
        harmonic = math.fsum(1.0 / k for k in range(1, n + 1))
        got = rank_threshold_frequency(table, Decade(1820), 10)
        assert got == pytest.approx((1.0 / 10) / harmonic, rel=1e-6)

    def test_rank_one_is_max(self):
        table = make_table(
            {"top": {1820: 900}, "mid": {1820: 90}, "low": {1820: 9}}, 1820, 1820, 1000
        )
        assert rank_threshold_frequency(table, Decade(1820), 1) == pytest.approx(
            table.frequency("top", Decade(1820))
        )

    def test_last_rank_is_min_nonzero(self):
        table = make_table(
            {"top": {1820: 900}, "low": {1820: 9}, "ghost": {1830: 1}},
            1820,
            1830,
            1000,
        )
        vocab = table.vocabulary_size(Decade(1820))
        assert vocab == 2
        assert rank_threshold_frequency(table, Decade(1820), vocab) == pytest.approx(
            table.frequency("low", Decade(1820))
        )

    def test_out_of_range(self):
        table = make_table({"a": {1820: 5}}, 1820, 1820)
        with pytest.raises(RankOutOfRange):
            rank_threshold_frequency(table, Decade(1820), 2)
        with pytest.raises(RankOutOfRange):
            rank_threshold_frequency(table, Decade(1820), 0)
