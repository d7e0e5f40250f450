from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lexflux import (
    Decade,
    contribution_fraction,
    contribution_report,
    jsd,
    rising_fraction_series,
    shannon_entropy,
    word_contribution,
)
from lexflux.errors import BothZero, InsufficientDecades
from lexflux.synth import oracle_jsd

from conftest import make_table

# Expected values frozen from 40-digit termwise evaluation of the formulas.
H_QUARTER_THREEQ = 0.8112781244591328
JSD_POINT_VS_SPLIT = 0.3112781244591328
CONTRIB_P1_Q3 = 0.0377443751081734272
A_CONTRIB = 0.0612781244591328639
RISING_FRACTION_1 = 0.8031402798844030
RISING_FRACTION_2 = 0.3720852655436107


class TestEntropy:
    def test_uniform_pair(self):
        assert shannon_entropy({"a": 0.5, "b": 0.5}) == 1.0

    def test_point_mass(self):
        assert shannon_entropy({"a": 1.0}) == 0.0

    def test_skewed_pair(self):
        assert shannon_entropy({"a": 0.25, "b": 0.75}) == pytest.approx(
            H_QUARTER_THREEQ, rel=1e-15
        )

    def test_bounds(self):
        rng = np.random.default_rng(7)
        for size in (2, 5, 100):
            probs = rng.dirichlet(np.ones(size))
            h = shannon_entropy(dict(zip(map(str, range(size)), probs)))
            assert -1e-12 <= h <= math.log2(size) + 1e-12


class TestJsd:
    def test_identical_is_exact_zero(self):
        dist = {"a": 0.3, "b": 0.7}
        assert jsd(dist, dist) == 0.0

    def test_disjoint_is_one(self):
        assert jsd({"a": 1.0}, {"b": 1.0}) == pytest.approx(1.0, abs=1e-12)

    def test_known_value(self):
        assert jsd({"a": 1.0}, {"a": 0.5, "b": 0.5}) == pytest.approx(
            JSD_POINT_VS_SPLIT, rel=1e-15
        )

    @given(
        st.lists(st.floats(0.01, 10.0), min_size=1, max_size=8),
        st.lists(st.floats(0.01, 10.0), min_size=1, max_size=8),
    )
    @settings(max_examples=80)
    def test_symmetry_and_bounds(self, wp, wq):
        p = {f"t{i}": w / sum(wp) for i, w in enumerate(wp)}
        q = {f"t{i + 3}": w / sum(wq) for i, w in enumerate(wq)}
        forward, backward = jsd(p, q), jsd(q, p)
        assert abs(forward - backward) < 1e-12
        assert -1e-15 <= forward <= 1.0 + 1e-12


class TestContributionFraction:
    def test_endpoints_and_center(self):
        assert contribution_fraction(1.0) == 0.0
        assert contribution_fraction(0.0) == pytest.approx(1.0, abs=1e-12)
        assert contribution_fraction(2.0) == pytest.approx(1.0, abs=1e-12)

    def test_symmetry_and_convexity_on_grid(self):
        grid = [round(0.01 * i, 2) for i in range(201)]
        values = [contribution_fraction(r) for r in grid]
        for r, v in zip(grid, values):
            assert v == pytest.approx(contribution_fraction(2.0 - r), abs=1e-12)
        for i in range(1, 200):
            assert values[i] <= 0.5 * (values[i - 1] + values[i + 1]) + 1e-12

    def test_domain(self):
        with pytest.raises(ValueError):
            contribution_fraction(-0.1)
        with pytest.raises(ValueError):
            contribution_fraction(2.1)


class TestWordContribution:
    def test_unchanged_word(self):
        c = word_contribution(0.1, 0.1)
        assert c.value == 0.0
        assert c.direction == "flat"
        assert c.r == 1.0

    def test_appearing_word_contributes_its_mixture(self):
        c = word_contribution(0.0, 0.2)
        assert c.value == pytest.approx(0.1, rel=1e-15)
        assert c.value == c.m
        assert c.direction == "rising"

    def test_known_value(self):
        c = word_contribution(0.1, 0.3)
        assert c.m == pytest.approx(0.2)
        assert c.r == pytest.approx(0.5)
        assert c.value == pytest.approx(CONTRIB_P1_Q3, rel=1e-14)

    def test_both_zero(self):
        with pytest.raises(BothZero):
            word_contribution(0.0, 0.0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            word_contribution(-0.1, 0.2)

    @given(st.floats(0, 0.5), st.floats(0, 0.5))
    @settings(max_examples=200)
    def test_invariants(self, p, q):
        if p == 0.0 and q == 0.0:
            return
        c = word_contribution(p, q)
        assert 0.0 <= c.value <= c.m + 1e-18
        assert c.r * c.m == pytest.approx(p, rel=1e-12, abs=1e-300)
        # symmetry is exact in C but cancellation near r=1 bounds the
        # achievable precision by machine epsilon at the scale of m
        assert abs(word_contribution(q, p).value - c.value) <= 1e-14 * c.m


class TestDecompositionIdentity:
    @pytest.mark.parametrize("seed", range(5))
    def test_sum_matches_direct_formula(self, seed):
        rng = np.random.default_rng(seed)
        size = int(rng.integers(2, 2000))
        p = rng.dirichlet(np.ones(size))
        q = rng.dirichlet(np.ones(size))
        tokens = [f"t{i}" for i in range(size)]
        total = math.fsum(
            word_contribution(pi, qi).value for pi, qi in zip(p, q)
        )
        direct = oracle_jsd(dict(zip(tokens, p)), dict(zip(tokens, q)))
        assert total == pytest.approx(direct, rel=1e-9)


class TestContributionReport:
    def _table(self):
        # decade 1820s: only "a"; decade 1830s: "a" and "b" split evenly
        return make_table(
            {"a": {1820: 100, 1830: 50}, "b": {1830: 50}}, 1820, 1830, 1000
        )

    def test_frozen_example(self):
        table = self._table()
        report = contribution_report(table, Decade(1820), Decade(1830))
        assert report.total_jsd == pytest.approx(JSD_POINT_VS_SPLIT, rel=1e-12)
        by_token = {c.token: c for c in report.contributions}
        assert by_token["b"].value == pytest.approx(0.25, rel=1e-12)
        assert by_token["b"].direction == "rising"
        assert by_token["a"].value == pytest.approx(A_CONTRIB, rel=1e-12)
        assert by_token["a"].direction == "falling"
        assert report.rising_fraction == pytest.approx(RISING_FRACTION_1, rel=1e-12)
        # ranked descending
        assert [c.token for c in report.contributions] == ["b", "a"]

    def test_second_frozen_example(self):
        table = make_table(
            {"a": {1820: 50, 1830: 25}, "b": {1820: 50, 1830: 75}}, 1820, 1830, 1000
        )
        report = contribution_report(table, Decade(1820), Decade(1830))
        assert report.rising_fraction == pytest.approx(RISING_FRACTION_2, rel=1e-12)

    def test_sum_equals_total(self):
        table = self._table()
        report = contribution_report(table, Decade(1820), Decade(1830))
        assert math.fsum(c.value for c in report.contributions) == pytest.approx(
            report.total_jsd, rel=1e-9
        )

    def test_identical_decades_report_no_divergence(self):
        table = make_table(
            {"a": {1820: 10, 1830: 10}, "b": {1820: 4, 1830: 4}}, 1820, 1830, 1000
        )
        report = contribution_report(table, Decade(1820), Decade(1830))
        assert report.no_divergence
        assert report.total_jsd == 0.0
        assert report.contributions == ()
        assert report.rising_fraction is None

    def test_top_k_truncates_list_not_fraction(self):
        table = make_table(
            {
                "a": {1820: 100, 1830: 10},
                "b": {1820: 10, 1830: 100},
                "c": {1820: 40, 1830: 60},
                "d": {1820: 60, 1830: 40},
            },
            1820,
            1830,
            1000,
        )
        full = contribution_report(table, Decade(1820), Decade(1830))
        cut = contribution_report(table, Decade(1820), Decade(1830), top_k=2)
        assert len(cut.contributions) == 2
        assert cut.rising_fraction == full.rising_fraction
        assert [c.token for c in cut.contributions] == [
            c.token for c in full.contributions[:2]
        ]

    def test_tie_break_is_lexicographic(self):
        table = make_table(
            {"zz": {1820: 30, 1830: 60}, "aa": {1820: 30, 1830: 60},
             "mm": {1820: 60, 1830: 30}},
            1820,
            1830,
            1000,
        )
        report = contribution_report(table, Decade(1820), Decade(1830))
        by_token = {c.token: c.value for c in report.contributions}
        assert by_token["aa"] == by_token["zz"]  # identical trajectories tie
        assert [c.token for c in report.contributions] == ["mm", "aa", "zz"]
        cut = contribution_report(table, Decade(1820), Decade(1830), top_k=2)
        assert [c.token for c in cut.contributions] == ["mm", "aa"]


class TestRisingFractionSeries:
    def test_pair_count(self):
        table = make_table(
            {"a": {1820: 5, 1830: 6, 1840: 7}}, 1820, 1840, 1000
        )
        assert len(rising_fraction_series(table, 1)) == 2
        assert len(rising_fraction_series(table, 2)) == 1

    def test_rising_dominated_corpus(self):
        # Exactly 1.0 is unreachable: probabilities sum to 1, so a riser
        # forces a faller somewhere. With raw-stable words dominating the
        # mass, their induced normalized falls are second-order and the
        # rising share approaches 1.
        table = make_table(
            {
                "bulk": {1820: 500_000, 1830: 500_000, 1840: 500_000},
                "up1": {1820: 10, 1830: 300, 1840: 900},
                "up2": {1830: 50, 1840: 400},
            },
            1820,
            1840,
            1_000_000,
        )
        for point in rising_fraction_series(table, 1):
            assert 0.99 < point.rising_fraction <= 1.0

    def test_insufficient_decades(self):
        table = make_table({"a": {1820: 5, 1830: 5}}, 1820, 1830, 1000)
        with pytest.raises(InsufficientDecades):
            rising_fraction_series(table, 2)

    def test_gap_ordering(self):
        table = make_table(
            {"a": {1820: 1, 1830: 2, 1840: 3, 1850: 4}}, 1820, 1850, 1000
        )
        points = rising_fraction_series(table, 3)
        assert len(points) == 1
        assert (points[0].first, points[0].second) == (Decade(1820), Decade(1850))
