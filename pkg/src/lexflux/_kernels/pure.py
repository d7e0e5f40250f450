"""Pure-Python kernel backend.

Mirrors the compiled backend in ``_speedups`` line for line in observable
behavior: identical record classification, identical accumulation order, and
identical IEEE-754 arithmetic on the hot path. Parity is pinned by tests.
"""

from __future__ import annotations

from typing import IO, Iterable

import numpy as np

from ..ingest import MAX_DIGITS, is_pos_tagged, is_year_token

BACKEND_NAME = "python"


class ShardAggregator:
    """Fused parse + filter + aggregate pass over shard byte streams.

    Accumulates, per token and per decade, the sum over kept records of
    ``match_count * (1.0 / year_total)``. Dividing by the decade length
    happens downstream. One instance may consume any number of shards;
    counters carry across.
    """

    def __init__(
        self,
        year_min: int,
        year_max: int,
        inv_totals,
        *,
        year_lo_bound: int = 1500,
        year_hi_bound: int = 2100,
        exclude_pos_tagged: bool = True,
        exclude_year_tokens: bool = False,
        year_token_range: tuple[int, int] = (1500, 2099),
        custom_exclusions: Iterable[str] = (),
    ) -> None:
        if year_min % 10 != 0 or (year_max - year_min + 1) % 10 != 0:
            raise ValueError("aggregation span must cover whole decades")
        self.year_min = year_min
        self.year_max = year_max
        self.n_decades = (year_max - year_min + 1) // 10
        inv = np.ascontiguousarray(inv_totals, dtype=np.float64)
        if inv.shape != (year_max - year_min + 1,):
            raise ValueError("inv_totals must have one entry per year of the span")
        self._inv = inv.tolist()
        self.year_lo_bound = year_lo_bound
        self.year_hi_bound = year_hi_bound
        self.exclude_pos_tagged = exclude_pos_tagged
        self.exclude_year_tokens = exclude_year_tokens
        self.year_token_range = year_token_range
        self.custom_exclusions = frozenset(custom_exclusions)
        self._sums: dict[str, list[float]] = {}
        self.lines = 0
        self.kept = 0
        self.filtered = 0
        self.malformed = 0

    def consume(self, fileobj: IO[bytes], chunk_size: int = 1 << 23) -> None:
        """Read one shard stream to EOF, updating sums and counters."""
        lines = kept = filtered = malformed = 0
        sums = self._sums
        inv = self._inv
        y0 = self.year_min
        y1 = self.year_max
        blo = self.year_lo_bound
        bhi = self.year_hi_bound
        excl_pos = self.exclude_pos_tagged
        excl_years = self.exclude_year_tokens
        ytok_range = self.year_token_range
        custom = self.custom_exclusions or None
        n_decades = self.n_decades

        for raw in fileobj:
            lines += 1
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError:
                malformed += 1
                continue
            if line.endswith("\n"):
                line = line[:-1]
            if line.endswith("\r"):
                line = line[:-1]
            parts = line.split("\t")
            if len(parts) != 4:
                malformed += 1
                continue
            token, year_s, match_s, volume_s = parts
            if (
                not token
                or not year_s
                or not match_s
                or not volume_s
                or len(year_s) > MAX_DIGITS
                or len(match_s) > MAX_DIGITS
                or len(volume_s) > MAX_DIGITS
                or not (year_s.isascii() and year_s.isdecimal())
                or not (match_s.isascii() and match_s.isdecimal())
                or not (volume_s.isascii() and volume_s.isdecimal())
            ):
                malformed += 1
                continue
            year = int(year_s)
            match_count = int(match_s)
            if int(volume_s) > match_count or not (blo <= year <= bhi):
                malformed += 1
                continue
            if excl_pos and "_" in token and is_pos_tagged(token):
                filtered += 1
                continue
            if custom is not None and token in custom:
                filtered += 1
                continue
            if excl_years and is_year_token(token, ytok_range):
                filtered += 1
                continue
            if not (y0 <= year <= y1):
                filtered += 1
                continue
            arr = sums.get(token)
            if arr is None:
                arr = [0.0] * n_decades
                sums[token] = arr
            offset = year - y0
            arr[offset // 10] += match_count * inv[offset]
            kept += 1

        self.lines += lines
        self.kept += kept
        self.filtered += filtered
        self.malformed += malformed

    def result(self) -> tuple[list[str], np.ndarray]:
        """Tokens in first-seen order plus their per-decade sum matrix."""
        tokens = list(self._sums)
        matrix = np.empty((len(tokens), self.n_decades), dtype=np.float64)
        for i, token in enumerate(tokens):
            matrix[i] = self._sums[token]
        return tokens, matrix


def contribution_values(p, q, out=None) -> np.ndarray:
    """Elementwise divergence contribution of aligned probability vectors.

    value = m * 0.5 * (r log2 r + (2-r) log2(2-r)) with m = (p+q)/2 and
    r = p/m, where x log2 x is 0 at x = 0. Entries with p = q = 0 yield 0.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    m = 0.5 * (p + q)
    nz = m > 0.0
    r = np.divide(p, m, out=np.zeros_like(m), where=nz)
    s = 2.0 - r
    a = np.zeros_like(m)
    np.multiply(r, np.log2(r, out=np.zeros_like(m), where=r > 0.0), out=a, where=r > 0.0)
    b = np.zeros_like(m)
    np.multiply(s, np.log2(s, out=np.zeros_like(m), where=s > 0.0), out=b, where=s > 0.0)
    values = m * (0.5 * (a + b))
    if out is not None:
        out[...] = values
        return out
    return values
