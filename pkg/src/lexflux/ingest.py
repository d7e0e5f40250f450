"""Streaming ingestion of Google Books Ngram v2 1-gram shards and totals files.

Shard format: one record per line, UTF-8, optionally gzip-compressed::

    token<TAB>year<TAB>match_count<TAB>volume_count

Total-counts format: whitespace-separated entries, each
``year,match_count,page_count,volume_count`` (page_count is discarded).

Malformed shard lines are never fatal: callers count and skip them through
:class:`IngestStats`. Only unrecoverable I/O aborts a stream.
"""

from __future__ import annotations

import gzip
import re
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterator

from .errors import DuplicateYear, MalformedEntry, MalformedLine

__all__ = [
    "YearRecord",
    "CorpusTotals",
    "TokenFilter",
    "IngestStats",
    "parse_line",
    "format_line",
    "stream_records",
    "parse_totals",
    "format_totals",
    "open_shard",
    "is_pos_tagged",
    "is_year_token",
]

# Sanity bounds on the year field of any record; narrower analysis ranges are
# applied as filters, values outside these bounds count as malformed.
DEFAULT_YEAR_BOUNDS = (1500, 2100)

# Tokens that are exactly four digits inside this range read as calendar-year
# references and can be screened out of low-threshold reports.
YEAR_TOKEN_RANGE = (1500, 2099)

# Longest accepted run of digits in a numeric field; 18 digits always fit in a
# signed 64-bit count, which the compiled kernel relies on.
MAX_DIGITS = 18

# v2 corpora annotate part-of-speech both as suffixes ("run_VERB") and as
# standalone placeholder tokens ("_VERB", "_NOUN_").
_POS_SUFFIX = re.compile(r"_[A-Z]+$")
_POS_STANDALONE = re.compile(r"^_[A-Z]+_$")


def is_pos_tagged(token: str) -> bool:
    """True for part-of-speech-annotated tokens and bare tag placeholders."""
    if "_" not in token:
        return False
    return bool(_POS_SUFFIX.search(token) or _POS_STANDALONE.match(token))


def is_year_token(token: str, bounds: tuple[int, int] = YEAR_TOKEN_RANGE) -> bool:
    """True for tokens that are exactly four ASCII digits within ``bounds``."""
    if len(token) != 4 or not (token.isascii() and token.isdecimal()):
        return False
    return bounds[0] <= int(token) <= bounds[1]


@dataclass(frozen=True, slots=True)
class YearRecord:
    """One parsed (token, year) observation from a 1-gram shard."""

    token: str
    year: int
    match_count: int
    volume_count: int

    def __post_init__(self) -> None:
        if not self.token or "\t" in self.token or "\n" in self.token:
            raise ValueError(f"invalid token: {self.token!r}")
        if self.match_count < 0 or self.volume_count < 0:
            raise ValueError("counts must be non-negative")
        if self.volume_count > self.match_count:
            raise ValueError("volume_count exceeds match_count")


@dataclass(frozen=True)
class TokenFilter:
    """Deterministic token-level screening applied during ingestion.

    ``exclude_year_tokens`` defaults to off: calendar-year references are a
    report-time policy, not an ingestion one.
    """

    exclude_pos_tagged: bool = True
    exclude_year_tokens: bool = False
    year_token_range: tuple[int, int] = YEAR_TOKEN_RANGE
    custom_exclusions: frozenset[str] = frozenset()

    def keeps(self, token: str) -> bool:
        if self.exclude_pos_tagged and is_pos_tagged(token):
            return False
        if self.custom_exclusions and token in self.custom_exclusions:
            return False
        if self.exclude_year_tokens and is_year_token(token, self.year_token_range):
            return False
        return True


@dataclass
class IngestStats:
    """Line accounting for one or more shard passes.

    Invariant: ``lines_read == kept + filtered + malformed``.
    """

    lines_read: int = 0
    kept: int = 0
    filtered: int = 0
    malformed: int = 0

    def merge(self, other: "IngestStats") -> None:
        self.lines_read += other.lines_read
        self.kept += other.kept
        self.filtered += other.filtered
        self.malformed += other.malformed

    def as_dict(self) -> dict[str, int]:
        return {
            "lines_read": self.lines_read,
            "kept": self.kept,
            "filtered": self.filtered,
            "malformed": self.malformed,
        }


class CorpusTotals:
    """Per-year total 1-gram counts, the relative-frequency denominators."""

    def __init__(self) -> None:
        self._by_year: dict[int, tuple[int, int]] = {}

    def add(self, year: int, match_count: int, volume_count: int) -> None:
        if year in self._by_year:
            raise DuplicateYear(f"duplicate totals entry for year {year}")
        if match_count < 0 or volume_count < 0:
            raise ValueError("totals must be non-negative")
        self._by_year[year] = (match_count, volume_count)

    @classmethod
    def from_mapping(cls, by_year: dict[int, tuple[int, int]]) -> "CorpusTotals":
        totals = cls()
        for year in sorted(by_year):
            mc, vc = by_year[year]
            totals.add(year, mc, vc)
        return totals

    def match_total(self, year: int) -> int | None:
        entry = self._by_year.get(year)
        return entry[0] if entry is not None else None

    def volume_total(self, year: int) -> int | None:
        entry = self._by_year.get(year)
        return entry[1] if entry is not None else None

    def years(self) -> list[int]:
        return sorted(self._by_year)

    def items(self) -> list[tuple[int, tuple[int, int]]]:
        return sorted(self._by_year.items())

    def __len__(self) -> int:
        return len(self._by_year)

    def __contains__(self, year: int) -> bool:
        return year in self._by_year

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CorpusTotals):
            return NotImplemented
        return self._by_year == other._by_year


def _parse_count(text: str) -> int:
    """Strict non-negative base-10 integer: ASCII digits only, bounded length."""
    if not text or len(text) > MAX_DIGITS:
        raise MalformedLine(f"bad numeric field: {text!r}")
    if not (text.isascii() and text.isdecimal()):
        raise MalformedLine(f"bad numeric field: {text!r}")
    return int(text)


def parse_line(
    line: str, year_bounds: tuple[int, int] = DEFAULT_YEAR_BOUNDS
) -> YearRecord:
    """Parse one shard line (without trailing newline) into a YearRecord.

    Raises MalformedLine on wrong field count, empty token, non-numeric
    fields, a year outside ``year_bounds``, or volume_count > match_count.
    """
    parts = line.split("\t")
    if len(parts) != 4:
        raise MalformedLine(f"expected 4 tab-separated fields, got {len(parts)}")
    token, year_s, match_s, volume_s = parts
    if not token:
        raise MalformedLine("empty token")
    year = _parse_count(year_s)
    match_count = _parse_count(match_s)
    volume_count = _parse_count(volume_s)
    if not (year_bounds[0] <= year <= year_bounds[1]):
        raise MalformedLine(f"year {year} outside bounds {year_bounds}")
    if volume_count > match_count:
        raise MalformedLine("volume_count exceeds match_count")
    return YearRecord(token, year, match_count, volume_count)


def format_line(record: YearRecord) -> str:
    """Inverse of parse_line (no trailing newline)."""
    return f"{record.token}\t{record.year}\t{record.match_count}\t{record.volume_count}"


def open_shard(path: str | Path) -> IO[bytes]:
    """Open a shard for binary reading, transparently decompressing gzip."""
    raw = open(path, "rb")
    head = raw.peek(2)[:2] if hasattr(raw, "peek") else b""
    if head == b"\x1f\x8b" or str(path).endswith(".gz"):
        return gzip.GzipFile(fileobj=raw)  # type: ignore[return-value]
    return raw


def stream_records(
    source: str | Path | IO[bytes],
    token_filter: TokenFilter | None = None,
    year_range: tuple[int, int] | None = None,
    *,
    year_bounds: tuple[int, int] = DEFAULT_YEAR_BOUNDS,
    stats: IngestStats | None = None,
) -> Iterator[YearRecord]:
    """Yield the records of one shard that pass the filter and year range.

    ``source`` is a path (gzip detected automatically) or a binary stream.
    Records come out in file order. Pass an IngestStats to collect line
    accounting; it is complete once the iterator is exhausted.
    """
    token_filter = token_filter if token_filter is not None else TokenFilter()
    close_after = isinstance(source, (str, Path))
    fobj: IO[bytes] = open_shard(source) if close_after else source  # type: ignore[assignment]
    try:
        for raw in fobj:
            if stats is not None:
                stats.lines_read += 1
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError:
                if stats is not None:
                    stats.malformed += 1
                continue
            if line.endswith("\n"):
                line = line[:-1]
            if line.endswith("\r"):
                line = line[:-1]
            try:
                record = parse_line(line, year_bounds)
            except MalformedLine:
                if stats is not None:
                    stats.malformed += 1
                continue
            if not token_filter.keeps(record.token) or (
                year_range is not None
                and not (year_range[0] <= record.year <= year_range[1])
            ):
                if stats is not None:
                    stats.filtered += 1
                continue
            if stats is not None:
                stats.kept += 1
            yield record
    finally:
        if close_after:
            fobj.close()


def parse_totals(source: Path | IO[bytes] | bytes | str) -> CorpusTotals:
    """Parse a total-counts source into CorpusTotals.

    Entries are whitespace-separated ``year,match_count,page_count,volume_count``
    quadruples; page_count is parsed and discarded. ``source`` is a Path or an
    open binary stream for files, or str/bytes content directly.
    """
    if isinstance(source, Path):
        data = source.read_bytes()
    elif isinstance(source, str):
        data = source.encode("utf-8")
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()
    text = data.decode("utf-8")

    totals = CorpusTotals()
    for entry in text.split():
        fields = entry.split(",")
        if len(fields) != 4:
            raise MalformedEntry(f"expected 4 comma-separated fields: {entry!r}")
        try:
            year, match_count, _page_count, volume_count = (
                _parse_count(f) for f in fields
            )
        except MalformedLine as exc:
            raise MalformedEntry(f"bad totals entry {entry!r}: {exc}") from None
        totals.add(year, match_count, volume_count)
    return totals


def format_totals(totals: CorpusTotals, page_counts: dict[int, int] | None = None) -> str:
    """Serialize totals in the whitespace-separated entry format."""
    parts = []
    for year, (mc, vc) in totals.items():
        pc = (page_counts or {}).get(year, mc // 500 + 1)
        parts.append(f"{year},{mc},{pc},{vc}")
    return "\t".join(parts)
