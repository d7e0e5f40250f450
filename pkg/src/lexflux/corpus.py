"""Decade-coarse-grained relative-frequency tables.

A DecadeTable stores, for every token, its mean relative frequency per decade:
the per-year ratio match_count / year_total averaged over the decade's ten
calendar years with equal weight. Two frequency views coexist downstream:
threshold analyses read the raw coarse-grained values (denominator = full
corpus totals, so thresholds stay on an absolute scale), while divergence
analyses renormalize each decade to a proper probability distribution.

Cache file layout (little-endian)::

    magic "LXFLXTBL" | u16 version | i32 first_decade | u32 n_decades
    | u64 n_tokens | rows (u32 token_len, token utf-8, n_decades f64)
    | sha256 of everything above

Frequencies are stored as raw IEEE-754 doubles, so load(save(t)) == t exactly.
"""

from __future__ import annotations

import hashlib
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import (
    CorruptTable,
    EmptyDecade,
    EmptyRange,
    MissingTotals,
    VersionMismatch,
)
from .ingest import (
    DEFAULT_YEAR_BOUNDS,
    CorpusTotals,
    IngestStats,
    TokenFilter,
    YearRecord,
    open_shard,
)

__all__ = [
    "Decade",
    "decade_span",
    "DecadeTable",
    "NormalizedDecadeDistribution",
    "build_decade_table",
    "build_decade_table_from_shards",
    "normalize",
    "save_table",
    "load_table",
    "export_tsv",
]

logger = logging.getLogger(__name__)

_MAGIC = b"LXFLXTBL"
_VERSION = 1
YEARS_PER_DECADE = 10


@dataclass(frozen=True, order=True, slots=True)
class Decade:
    """A ten-year bin identified by its first calendar year (e.g. 1820 = 1820-1829)."""

    start_year: int

    def __post_init__(self) -> None:
        if self.start_year % 10 != 0:
            raise ValueError(f"decade start {self.start_year} not divisible by 10")

    @property
    def end_year(self) -> int:
        return self.start_year + YEARS_PER_DECADE - 1

    @property
    def years(self) -> range:
        return range(self.start_year, self.start_year + YEARS_PER_DECADE)

    @property
    def label(self) -> str:
        return f"{self.start_year}s"

    @classmethod
    def parse(cls, text: str) -> "Decade":
        """Accept '1820' or '1820s'."""
        text = text.strip()
        if text.endswith("s"):
            text = text[:-1]
        return cls(int(text))

    def __str__(self) -> str:
        return self.label


def decade_span(first: Decade, last: Decade) -> tuple[Decade, ...]:
    """All decades from first to last inclusive."""
    if first > last:
        raise EmptyRange(f"first decade {first} after last {last}")
    return tuple(
        Decade(y) for y in range(first.start_year, last.start_year + 1, 10)
    )


class DecadeTable:
    """Immutable token -> per-decade mean relative frequency table.

    Tokens are kept lexicographically sorted; absent (token, decade) cells are
    exactly zero and all-zero tokens are dropped at construction.
    """

    def __init__(
        self,
        decades: Sequence[Decade],
        tokens: Sequence[str],
        matrix: np.ndarray,
    ) -> None:
        decades = tuple(decades)
        tokens = tuple(tokens)
        matrix = np.ascontiguousarray(matrix, dtype=np.float64)
        if matrix.shape != (len(tokens), len(decades)):
            raise ValueError("matrix shape does not match tokens x decades")
        if len(decades) == 0:
            raise EmptyRange("table needs at least one decade")
        starts = [d.start_year for d in decades]
        if starts != list(range(starts[0], starts[0] + 10 * len(starts), 10)):
            raise ValueError("decades must be contiguous and ascending")
        if any(tokens[i] >= tokens[i + 1] for i in range(len(tokens) - 1)):
            raise ValueError("tokens must be strictly sorted")
        if matrix.size and float(matrix.min()) < 0.0:
            raise ValueError("frequencies must be non-negative")
        matrix.setflags(write=False)
        self._decades = decades
        self._tokens = tokens
        self._matrix = matrix
        self._index = {t: i for i, t in enumerate(tokens)}
        self._masses = matrix.sum(axis=0)
        self._masses.setflags(write=False)
        self._vocab = np.count_nonzero(matrix > 0.0, axis=0)
        self._year_token_mask: np.ndarray | None = None

    @property
    def decades(self) -> tuple[Decade, ...]:
        return self._decades

    @property
    def tokens(self) -> tuple[str, ...]:
        return self._tokens

    @property
    def matrix(self) -> np.ndarray:
        """Read-only (n_tokens, n_decades) view of the frequencies."""
        return self._matrix

    @property
    def n_tokens(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def decade_index(self, decade: Decade) -> int:
        offset = (decade.start_year - self._decades[0].start_year) // 10
        if not 0 <= offset < len(self._decades):
            raise KeyError(f"decade {decade} outside table range")
        return offset

    def frequency(self, token: str, decade: Decade) -> float:
        """Raw coarse-grained relative frequency; 0.0 when absent."""
        row = self._index.get(token)
        if row is None:
            return 0.0
        return float(self._matrix[row, self.decade_index(decade)])

    def token_series(self, token: str) -> np.ndarray:
        row = self._index.get(token)
        if row is None:
            return np.zeros(len(self._decades))
        return self._matrix[row]

    def column(self, decade: Decade) -> np.ndarray:
        return self._matrix[:, self.decade_index(decade)]

    def mass(self, decade: Decade) -> float:
        """Sum of stored relative frequencies in the decade (< 1 after filtering)."""
        return float(self._masses[self.decade_index(decade)])

    def vocabulary_size(self, decade: Decade) -> int:
        """Number of tokens with nonzero coarse-grained frequency."""
        return int(self._vocab[self.decade_index(decade)])

    def year_token_mask(self, bounds: tuple[int, int] = (1500, 2099)) -> np.ndarray:
        """Boolean mask of tokens that read as calendar-year references."""
        if self._year_token_mask is None:
            from .ingest import is_year_token

            mask = np.fromiter(
                (is_year_token(t, bounds) for t in self._tokens),
                dtype=bool,
                count=len(self._tokens),
            )
            mask.setflags(write=False)
            self._year_token_mask = mask
        return self._year_token_mask

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DecadeTable):
            return NotImplemented
        return (
            self._decades == other._decades
            and self._tokens == other._tokens
            and self._matrix.shape == other._matrix.shape
            and bool(np.all(self._matrix == other._matrix))
        )

    def content_digest(self) -> str:
        """SHA-256 over the serialized form; equals the cache-file checksum."""
        h = hashlib.sha256()
        for block in _serialized_blocks(self):
            h.update(block)
        return h.hexdigest()


def _serialized_blocks(table: DecadeTable) -> Iterator[bytes]:
    yield _MAGIC
    yield struct.pack(
        "<HiIQ",
        _VERSION,
        table.decades[0].start_year,
        len(table.decades),
        table.n_tokens,
    )
    matrix = table.matrix
    for i, token in enumerate(table.tokens):
        raw = token.encode("utf-8")
        yield struct.pack("<I", len(raw)) + raw + matrix[i].tobytes()


def _validate_totals(
    totals: CorpusTotals, decades: Sequence[Decade]
) -> np.ndarray:
    """Inverse totals for every year of the span; MissingTotals if any is unusable."""
    first = decades[0].start_year
    n_years = len(decades) * YEARS_PER_DECADE
    inv = np.empty(n_years, dtype=np.float64)
    for i in range(n_years):
        year = first + i
        total = totals.match_total(year)
        if total is None or total <= 0:
            raise MissingTotals(f"year {year} has no positive total 1-gram count")
        inv[i] = 1.0 / total
    return inv


def _finalize(
    decades: tuple[Decade, ...], tokens: list[str], matrix: np.ndarray
) -> DecadeTable:
    order = sorted(range(len(tokens)), key=tokens.__getitem__)
    tokens_sorted = [tokens[i] for i in order]
    matrix = matrix[order] if len(order) else matrix.reshape(0, len(decades))
    matrix /= float(YEARS_PER_DECADE)
    nonzero = matrix.any(axis=1)
    if not nonzero.all():
        matrix = matrix[nonzero]
        tokens_sorted = [t for t, keep in zip(tokens_sorted, nonzero) if keep]
    return DecadeTable(decades, tokens_sorted, matrix)


def build_decade_table(
    records: Iterable[YearRecord],
    totals: CorpusTotals,
    first: Decade,
    last: Decade,
) -> DecadeTable:
    """Aggregate already-parsed records into a decade table.

    Every year of every decade in range must have a positive total. Records
    outside the range are ignored; absent (token, decade) pairs stay exactly 0.
    """
    decades = decade_span(first, last)
    inv = _validate_totals(totals, decades)
    inv_list = inv.tolist()
    y0 = first.start_year
    y1 = last.end_year
    n_decades = len(decades)
    sums: dict[str, list[float]] = {}
    for rec in records:
        if not (y0 <= rec.year <= y1):
            continue
        arr = sums.get(rec.token)
        if arr is None:
            arr = [0.0] * n_decades
            sums[rec.token] = arr
        offset = rec.year - y0
        arr[offset // 10] += rec.match_count * inv_list[offset]
    tokens = list(sums)
    matrix = np.empty((len(tokens), n_decades), dtype=np.float64)
    for i, token in enumerate(tokens):
        matrix[i] = sums[token]
    return _finalize(decades, tokens, matrix)


def build_decade_table_from_shards(
    shard_paths: Sequence[str | Path],
    totals: CorpusTotals,
    first: Decade,
    last: Decade,
    token_filter: TokenFilter | None = None,
    *,
    year_bounds: tuple[int, int] = DEFAULT_YEAR_BOUNDS,
    backend: str | None = None,
) -> tuple[DecadeTable, IngestStats]:
    """Fused parse + aggregate over shard files via the kernel backend.

    Equivalent to streaming records through build_decade_table, but without
    materializing them; this is the hot path for multi-GB inputs.
    """
    token_filter = token_filter if token_filter is not None else TokenFilter()
    decades = decade_span(first, last)
    inv = _validate_totals(totals, decades)
    impl = _kernels.get_backend(backend)
    agg = impl.ShardAggregator(
        first.start_year,
        last.end_year,
        inv,
        year_lo_bound=year_bounds[0],
        year_hi_bound=year_bounds[1],
        exclude_pos_tagged=token_filter.exclude_pos_tagged,
        exclude_year_tokens=token_filter.exclude_year_tokens,
        year_token_range=token_filter.year_token_range,
        custom_exclusions=token_filter.custom_exclusions,
    )
    for path in shard_paths:
        with open_shard(path) as fobj:
            agg.consume(fobj)
        logger.info("aggregated %s (%d lines so far)", path, agg.lines)
    tokens, matrix = agg.result()
    stats = IngestStats(
        lines_read=agg.lines,
        kept=agg.kept,
        filtered=agg.filtered,
        malformed=agg.malformed,
    )
    return _finalize(decades, tokens, matrix), stats


class NormalizedDecadeDistribution:
    """Probability distribution of one decade over its retained vocabulary."""

    __slots__ = ("tokens", "probs", "decade")

    def __init__(
        self,
        tokens: tuple[str, ...],
        probs: np.ndarray,
        decade: Decade | None = None,
    ) -> None:
        probs = np.ascontiguousarray(probs, dtype=np.float64)
        if probs.shape != (len(tokens),):
            raise ValueError("probs must align with tokens")
        probs.setflags(write=False)
        self.tokens = tokens
        self.probs = probs
        self.decade = decade

    @classmethod
    def from_dict(
        cls, probs: Mapping[str, float], decade: Decade | None = None
    ) -> "NormalizedDecadeDistribution":
        tokens = tuple(sorted(probs))
        vec = np.array([probs[t] for t in tokens], dtype=np.float64)
        return cls(tokens, vec, decade)

    def prob(self, token: str) -> float:
        try:
            return float(self.probs[self.tokens.index(token)])
        except ValueError:
            return 0.0

    def total(self) -> float:
        return float(self.probs.sum())

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.probs > 0.0))

    def as_dict(self) -> dict[str, float]:
        """Nonzero entries only."""
        return {
            t: float(p) for t, p in zip(self.tokens, self.probs) if p > 0.0
        }


def normalize(table: DecadeTable, decade: Decade) -> NormalizedDecadeDistribution:
    """Renormalize one decade's stored frequencies to a probability distribution."""
    mass = table.mass(decade)
    if mass <= 0.0:
        raise EmptyDecade(f"decade {decade} has zero total mass")
    return NormalizedDecadeDistribution(
        table.tokens, table.column(decade) / mass, decade
    )


def save_table(table: DecadeTable, sink: str | Path | IO[bytes]) -> str:
    """Write the versioned, checksummed cache format. Returns the checksum."""
    h = hashlib.sha256()
    own = isinstance(sink, (str, Path))
    fobj: IO[bytes] = open(sink, "wb") if own else sink  # type: ignore[assignment]
    try:
        for block in _serialized_blocks(table):
            h.update(block)
            fobj.write(block)
        fobj.write(h.digest())
    finally:
        if own:
            fobj.close()
    return h.hexdigest()


def load_table(source: str | Path | IO[bytes]) -> DecadeTable:
    """Read a cache produced by save_table; bit-identical to the original."""
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = source.read()
    if len(data) < len(_MAGIC) + 18 + 32:
        raise CorruptTable("file too short to be a table cache")
    body, digest = data[:-32], data[-32:]
    if body[: len(_MAGIC)] != _MAGIC:
        raise CorruptTable("bad magic bytes")
    if hashlib.sha256(body).digest() != digest:
        raise CorruptTable("checksum mismatch")
    pos = len(_MAGIC)
    version, first_year, n_decades, n_tokens = struct.unpack_from("<HiIQ", body, pos)
    pos += 18
    if version != _VERSION:
        raise VersionMismatch(
            f"table format version {version}, this build reads {_VERSION}"
        )
    decades = decade_span(Decade(first_year), Decade(first_year + 10 * (n_decades - 1)))
    tokens: list[str] = []
    matrix = np.empty((n_tokens, n_decades), dtype=np.float64)
    row_bytes = 8 * n_decades
    for i in range(n_tokens):
        if pos + 4 > len(body):
            raise CorruptTable("truncated token header")
        (tok_len,) = struct.unpack_from("<I", body, pos)
        pos += 4
        if pos + tok_len + row_bytes > len(body):
            raise CorruptTable("truncated row")
        tokens.append(body[pos : pos + tok_len].decode("utf-8"))
        pos += tok_len
        matrix[i] = np.frombuffer(body, dtype="<f8", count=n_decades, offset=pos)
        pos += row_bytes
    if pos != len(body):
        raise CorruptTable("trailing bytes after last row")
    return DecadeTable(decades, tokens, matrix)


def export_tsv(table: DecadeTable, sink: str | Path | IO[str]) -> None:
    """Interoperability export: token, decade_start, relative_frequency.

    One row per nonzero cell, header included, frequencies in shortest
    round-trip decimal form.
    """
    own = isinstance(sink, (str, Path))
    fobj: IO[str] = open(sink, "w", encoding="utf-8") if own else sink  # type: ignore[assignment]
    try:
        fobj.write("token\tdecade_start\trelative_frequency\n")
        matrix = table.matrix
        for i, token in enumerate(table.tokens):
            for j, decade in enumerate(table.decades):
                value = float(matrix[i, j])
                if value > 0.0:
                    fobj.write(f"{token}\t{decade.start_year}\t{value!r}\n")
    finally:
        if own:
            fobj.close()
