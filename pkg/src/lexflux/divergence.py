"""Information-theoretic core: entropy, divergence, and its per-word split.

All logarithms are base 2 and all quantities are in bits, so the divergence
between two distributions lies in [0, 1]: 0 for identical distributions, 1
for disjoint supports. Each word contributes ``m * C(r)`` where m is its
mixture probability (p+q)/2 and r = p/m; C is convex, symmetric about r = 1
(no change, no contribution) and reaches 1 at r = 0 and r = 2 (appearance or
disappearance contributes exactly the mixture probability).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .corpus import Decade, DecadeTable, NormalizedDecadeDistribution
from .errors import BothZero, EmptyDecade, InsufficientDecades

__all__ = [
    "Contribution",
    "DivergenceReport",
    "RisingFractionPoint",
    "shannon_entropy",
    "jsd",
    "contribution_fraction",
    "word_contribution",
    "contribution_report",
    "rising_fraction_series",
]

RISING = "rising"
FALLING = "falling"
FLAT = "flat"


@dataclass(frozen=True, slots=True)
class Contribution:
    """One word's share of the divergence between two decades."""

    token: str
    p: float
    q: float
    m: float
    r: float
    value: float
    direction: str


@dataclass(frozen=True)
class DivergenceReport:
    """Ranked per-word decomposition of the divergence between two decades.

    ``contributions`` holds the top slice (all words when untruncated);
    ``rising_fraction`` is always computed on the full vocabulary and is None
    when the decades are identical (no divergence to apportion).
    """

    first: Decade
    second: Decade
    total_jsd: float
    contributions: tuple[Contribution, ...]
    rising_fraction: float | None
    rising_jsd: float
    falling_jsd: float
    union_size: int

    @property
    def no_divergence(self) -> bool:
        return self.total_jsd == 0.0

    def to_rows(self) -> list[tuple[str, float, float, float, str]]:
        """(token, p, q, contribution_bits, direction) rows, ranked."""
        return [(c.token, c.p, c.q, c.value, c.direction) for c in self.contributions]


@dataclass(frozen=True, slots=True)
class RisingFractionPoint:
    first: Decade
    second: Decade
    jsd_bits: float
    rising_fraction: float | None


def _as_vector(dist: NormalizedDecadeDistribution | Mapping[str, float]):
    if isinstance(dist, NormalizedDecadeDistribution):
        return dist.tokens, dist.probs
    tokens = tuple(sorted(dist))
    return tokens, np.array([dist[t] for t in tokens], dtype=np.float64)


def _aligned(p_dist, q_dist) -> tuple[np.ndarray, np.ndarray]:
    p_tokens, p_vec = _as_vector(p_dist)
    q_tokens, q_vec = _as_vector(q_dist)
    if p_tokens is q_tokens or p_tokens == q_tokens:
        return p_vec, q_vec
    union = sorted(set(p_tokens) | set(q_tokens))
    p_map = dict(zip(p_tokens, p_vec))
    q_map = dict(zip(q_tokens, q_vec))
    p_out = np.array([p_map.get(t, 0.0) for t in union], dtype=np.float64)
    q_out = np.array([q_map.get(t, 0.0) for t in union], dtype=np.float64)
    return p_out, q_out


def _entropy_bits(vec: np.ndarray) -> float:
    nz = vec[vec > 0.0]
    if nz.size == 0:
        return 0.0
    return float(-np.sum(nz * np.log2(nz)))


def shannon_entropy(dist: NormalizedDecadeDistribution | Mapping[str, float]) -> float:
    """Shannon entropy in bits, with 0 log 0 taken as 0.

    The input must already sum to 1; this is not revalidated here.
    """
    _, vec = _as_vector(dist)
    return _entropy_bits(np.asarray(vec, dtype=np.float64))


def _jsd_vectors(p: np.ndarray, q: np.ndarray) -> float:
    m = 0.5 * (p + q)
    value = _entropy_bits(m) - 0.5 * (_entropy_bits(p) + _entropy_bits(q))
    # guard rounding for near-identical inputs; analytically the value is >= 0
    return value if value > 0.0 else 0.0


def jsd(
    P: NormalizedDecadeDistribution | Mapping[str, float],
    Q: NormalizedDecadeDistribution | Mapping[str, float],
) -> float:
    """Divergence H(M) - (H(P) + H(Q)) / 2 in bits, M = (P + Q) / 2.

    Supports may differ; both inputs must each sum to 1.
    """
    p, q = _aligned(P, Q)
    return _jsd_vectors(p, q)


def contribution_fraction(r: float) -> float:
    """C(r) = (r log2 r + (2-r) log2(2-r)) / 2 on [0, 2], with 0 log 0 = 0."""
    if not 0.0 <= r <= 2.0:
        raise ValueError(f"ratio {r} outside [0, 2]")
    a = r * math.log2(r) if r > 0.0 else 0.0
    s = 2.0 - r
    b = s * math.log2(s) if s > 0.0 else 0.0
    return 0.5 * (a + b)


def word_contribution(p: float, q: float, token: str = "") -> Contribution:
    """Contribution of one word with probabilities p (first decade) and q (second)."""
    if p < 0.0 or q < 0.0:
        raise ValueError("probabilities must be non-negative")
    if p == 0.0 and q == 0.0:
        raise BothZero("word absent from both decades")
    m = 0.5 * (p + q)
    r = p / m
    value = m * contribution_fraction(r)
    direction = RISING if q > p else FALLING if q < p else FLAT
    return Contribution(token, p, q, m, r, value, direction)


def _column_probs(table: DecadeTable, decade: Decade) -> np.ndarray:
    mass = table.mass(decade)
    if mass <= 0.0:
        raise EmptyDecade(f"decade {decade} has zero total mass")
    return table.column(decade) / mass


def _pair_vectors(table: DecadeTable, first: Decade, second: Decade):
    return _column_probs(table, first), _column_probs(table, second)


def _top_indices(values: np.ndarray, tokens: Sequence[str], k: int) -> list[int]:
    """Indices of the k largest values; ties broken by token, ascending."""
    n = values.size
    if k <= 0:
        return []
    if k >= n:
        candidates = list(range(n))
    else:
        cutoff = np.partition(values, n - k)[n - k]
        above = np.nonzero(values > cutoff)[0]
        at = np.nonzero(values == cutoff)[0]
        need = k - above.size
        at_sorted = sorted(at, key=tokens.__getitem__)[:need]
        candidates = list(above) + at_sorted
    candidates.sort(key=lambda i: (-values[i], tokens[i]))
    return candidates


def contribution_report(
    table: DecadeTable,
    first: Decade,
    second: Decade,
    top_k: int | None = None,
) -> DivergenceReport:
    """Decompose the divergence between two decades over their union support.

    Contributions are ranked descending (ties lexicographic by token); the
    rising fraction uses the untruncated totals.
    """
    p, q = _pair_vectors(table, first, second)
    total = _jsd_vectors(p, q)
    values = _kernels.contribution_values(p, q)
    union = (p > 0.0) | (q > 0.0)
    rising_sum = float(values[q > p].sum())
    falling_sum = float(values[q < p].sum())

    if total == 0.0:
        return DivergenceReport(
            first, second, 0.0, (), None, 0.0, 0.0, int(union.sum())
        )

    changed = np.nonzero(values > 0.0)[0]
    k = len(changed) if top_k is None else min(top_k, len(changed))
    changed_values = values[changed]
    tokens = table.tokens
    changed_tokens = [tokens[i] for i in changed]
    picked = _top_indices(changed_values, changed_tokens, k)
    contributions = []
    for local in picked:
        i = changed[local]
        pi, qi = float(p[i]), float(q[i])
        m = 0.5 * (pi + qi)
        contributions.append(
            Contribution(
                tokens[i],
                pi,
                qi,
                m,
                pi / m,
                float(values[i]),
                RISING if qi > pi else FALLING if qi < pi else FLAT,
            )
        )
    return DivergenceReport(
        first,
        second,
        total,
        tuple(contributions),
        rising_sum / total,
        rising_sum,
        falling_sum,
        int(union.sum()),
    )


def pair_divergence_sums(
    table: DecadeTable, first: Decade, second: Decade
) -> tuple[float, float, float]:
    """(total_jsd, rising_sum, falling_sum) without building ranked objects."""
    p, q = _pair_vectors(table, first, second)
    total = _jsd_vectors(p, q)
    values = _kernels.contribution_values(p, q)
    return total, float(values[q > p].sum()), float(values[q < p].sum())


def rising_fraction_series(
    table: DecadeTable, gap: int = 1
) -> list[RisingFractionPoint]:
    """Rising-contribution fraction for every decade pair ``gap`` decades apart."""
    if gap < 1:
        raise ValueError("gap must be at least 1")
    decades = table.decades
    if len(decades) < gap + 1:
        raise InsufficientDecades(
            f"table spans {len(decades)} decades, need at least {gap + 1}"
        )
    points = []
    for i in range(len(decades) - gap):
        first, second = decades[i], decades[i + gap]
        total, rising_sum, _ = pair_divergence_sums(table, first, second)
        fraction = rising_sum / total if total > 0.0 else None
        points.append(RisingFractionPoint(first, second, total, fraction))
    return points
