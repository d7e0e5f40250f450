"""Synthetic year-resolution corpora with scripted ground truth.

A script is a static Zipf background (vocabulary N, exponent s, yearly total
T) plus explicitly scripted word trajectories. Emitted counts are
``round(T * value)`` per token per year, with the totals file summing exactly
the emitted counts, so every analysis result is predictable from the script
alone. Trajectory shapes:

    constant   value = peak over [birth, death]
    ramp       linear climb to peak at death: peak * (i+1) / lifespan
    decay      time-reversed ramp: peak at birth, linear fall to peak / lifespan
    rise_fall  triangular, peaking mid-life: peak * (min(i, L-1-i)+1) / ceil(L/2)

Generation is deterministic: the seed only drives per-record volume counts,
never frequencies. Script files are line-oriented::

    # comment
    years 1820 1999
    background vocab=1000 exponent=1.0 yearly_total=1000000
    word token=alpha birth=1850 death=1890 peak=1e-5 shape=rise_fall
"""

from __future__ import annotations

import gzip
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterator, Mapping, Sequence

import numpy as np

from .corpus import Decade, NormalizedDecadeDistribution
from .errors import InvalidScript
from .ingest import CorpusTotals, YearRecord, format_totals

__all__ = [
    "ScriptedWord",
    "TrajectoryScript",
    "generate",
    "write_corpus",
    "oracle_flux",
    "guard_band_tokens",
    "oracle_jsd",
    "parse_script",
    "load_script",
    "format_script",
]

SHAPES = ("constant", "ramp", "decay", "rise_fall")
_BG_PREFIX = "bg"


@dataclass(frozen=True, slots=True)
class ScriptedWord:
    token: str
    birth: int
    death: int
    peak: float
    shape: str = "constant"

    def value(self, year: int) -> float:
        """Analytic relative-frequency trajectory, 0 outside [birth, death]."""
        if year < self.birth or year > self.death:
            return 0.0
        lifespan = self.death - self.birth + 1
        i = year - self.birth
        if self.shape == "constant":
            return self.peak
        if self.shape == "ramp":
            return self.peak * (i + 1) / lifespan
        if self.shape == "decay":
            return self.peak * (lifespan - i) / lifespan
        half = (lifespan + 1) // 2
        return self.peak * (min(i, lifespan - 1 - i) + 1) / half


@dataclass(frozen=True)
class TrajectoryScript:
    """Static Zipf background plus scripted word trajectories."""

    background_vocab: int
    zipf_exponent: float
    yearly_total: int
    words: tuple[ScriptedWord, ...] = ()

    def __post_init__(self) -> None:
        if self.background_vocab < 1:
            raise InvalidScript("background vocabulary must be at least 1")
        if not self.zipf_exponent > 0.0:
            raise InvalidScript("Zipf exponent must be positive")
        if self.yearly_total < 1:
            raise InvalidScript("yearly total must be at least 1")
        seen = set()
        for word in self.words:
            if not word.token or "\t" in word.token or any(c.isspace() for c in word.token):
                raise InvalidScript(f"bad scripted token {word.token!r}")
            if word.token.startswith(_BG_PREFIX) and word.token[len(_BG_PREFIX):].isdigit():
                raise InvalidScript(f"token {word.token!r} collides with background names")
            if word.token in seen:
                raise InvalidScript(f"duplicate scripted token {word.token!r}")
            seen.add(word.token)
            if word.birth > word.death:
                raise InvalidScript(f"{word.token!r}: birth after death")
            if not word.peak > 0.0:
                raise InvalidScript(f"{word.token!r}: peak must be positive")
            if word.shape not in SHAPES:
                raise InvalidScript(f"{word.token!r}: unknown shape {word.shape!r}")

    def check_years(self, years: tuple[int, int]) -> None:
        y0, y1 = years
        if y0 > y1:
            raise InvalidScript("year range is empty")
        for word in self.words:
            if word.birth < y0 or word.death > y1:
                raise InvalidScript(
                    f"{word.token!r} lives outside the year range {years}"
                )


def _background(script: TrajectoryScript) -> tuple[list[str], np.ndarray]:
    """Background token names and their constant per-year counts."""
    n = script.background_vocab
    ranks = np.arange(1, n + 1, dtype=np.float64)
    weights = ranks ** -script.zipf_exponent
    freqs = weights / weights.sum()
    counts = np.rint(script.yearly_total * freqs).astype(np.int64)
    width = len(str(n))
    tokens = [f"{_BG_PREFIX}{k:0{width}d}" for k in range(1, n + 1)]
    return tokens, counts


def _word_counts(word: ScriptedWord, years: tuple[int, int], total: int) -> np.ndarray:
    y0, y1 = years
    return np.array(
        [round(total * word.value(y)) for y in range(y0, y1 + 1)], dtype=np.int64
    )


def year_match_totals(script: TrajectoryScript, years: tuple[int, int]) -> np.ndarray:
    """Exact per-year total match counts of the emitted corpus."""
    y0, y1 = years
    n_years = y1 - y0 + 1
    _, bg_counts = _background(script)
    totals = np.full(n_years, int(bg_counts.sum()), dtype=np.int64)
    for word in script.words:
        totals += _word_counts(word, years, script.yearly_total)
    return totals


def _volume_rng(seed: int, ordinal: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, ordinal)))


def _iter_tokens(
    script: TrajectoryScript, years: tuple[int, int]
) -> Iterator[tuple[int, str, int, np.ndarray]]:
    """(ordinal, token, first_year, counts-over-alive-span) per token."""
    y0, y1 = years
    bg_tokens, bg_counts = _background(script)
    n_years = y1 - y0 + 1
    for ordinal, (token, count) in enumerate(zip(bg_tokens, bg_counts.tolist())):
        if count > 0:
            yield ordinal, token, y0, np.full(n_years, count, dtype=np.int64)
    base = len(bg_tokens)
    for offset, word in enumerate(script.words):
        counts = _word_counts(word, (word.birth, word.death), script.yearly_total)
        yield base + offset, word.token, word.birth, counts


def generate(
    script: TrajectoryScript, years: tuple[int, int], seed: int = 0
) -> tuple[list[YearRecord], CorpusTotals]:
    """Materialize the scripted corpus as records plus consistent totals."""
    script.check_years(years)
    y0, y1 = years
    match_totals = {y: 0 for y in range(y0, y1 + 1)}
    volume_totals = {y: 0 for y in range(y0, y1 + 1)}
    records: list[YearRecord] = []
    for ordinal, token, first_year, counts in _iter_tokens(script, years):
        alive = np.nonzero(counts)[0]
        if alive.size == 0:
            continue
        rng = _volume_rng(seed, ordinal)
        volumes = rng.integers(1, counts[alive] + 1)
        for j, v in zip(alive.tolist(), volumes.tolist()):
            year = first_year + j
            count = int(counts[j])
            records.append(YearRecord(token, year, count, v))
            match_totals[year] += count
            volume_totals[year] += v
    totals = CorpusTotals.from_mapping(
        {y: (match_totals[y], volume_totals[y]) for y in range(y0, y1 + 1)}
    )
    return records, totals


def write_corpus(
    script: TrajectoryScript,
    years: tuple[int, int],
    out_dir: str | Path,
    *,
    seed: int = 0,
    shards: int = 1,
    compress: bool = False,
) -> tuple[list[Path], Path]:
    """Write the corpus as shard TSV files plus a totals file.

    Tokens are striped round-robin across shards, each token's records kept
    contiguous with years ascending. Returns (shard paths, totals path).
    """
    script.check_years(years)
    if shards < 1:
        raise ValueError("need at least one shard")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    suffix = ".tsv.gz" if compress else ".tsv"
    paths = [out_dir / f"shard-{i:03d}{suffix}" for i in range(shards)]
    y0, y1 = years
    match_totals = np.zeros(y1 - y0 + 1, dtype=np.int64)
    volume_totals = np.zeros(y1 - y0 + 1, dtype=np.int64)

    sinks: list[IO[str]] = []
    try:
        for path in paths:
            if compress:
                sinks.append(
                    gzip.open(path, "wt", encoding="utf-8", compresslevel=1)
                )
            else:
                sinks.append(open(path, "w", encoding="utf-8"))
        for ordinal, token, first_year, counts in _iter_tokens(script, years):
            alive = np.nonzero(counts)[0]
            if alive.size == 0:
                continue
            rng = _volume_rng(seed, ordinal)
            volumes = rng.integers(1, counts[alive] + 1)
            sink = sinks[ordinal % shards]
            prefix = token + "\t"
            lines = [
                f"{prefix}{first_year + j}\t{counts[j]}\t{v}\n"
                for j, v in zip(alive.tolist(), volumes.tolist())
            ]
            sink.writelines(lines)
            base = first_year - y0
            match_totals[base + alive] += counts[alive]
            volume_totals[base + alive] += volumes
    finally:
        for sink in sinks:
            sink.close()

    totals = CorpusTotals.from_mapping(
        {
            y0 + i: (int(match_totals[i]), int(volume_totals[i]))
            for i in range(y1 - y0 + 1)
        }
    )
    totals_path = out_dir / "totalcounts.txt"
    totals_path.write_text(format_totals(totals), encoding="utf-8")
    return paths, totals_path


def _decade_means(
    script: TrajectoryScript, years: tuple[int, int], decade: Decade
) -> dict[str, float]:
    """Effective decade-mean relative frequency per token, matching the
    ingest pipeline's arithmetic exactly (rounded counts, exact totals,
    years accumulated in ascending order, mean taken at the end)."""
    y0, y1 = years
    if decade.start_year < y0 or decade.end_year > y1:
        raise ValueError(f"decade {decade} outside year range {years}")
    totals = year_match_totals(script, years)
    inv = 1.0 / totals
    bg_tokens, bg_counts = _background(script)
    acc = np.zeros(len(bg_tokens), dtype=np.float64)
    for year in decade.years:
        acc = acc + bg_counts * inv[year - y0]
    acc /= 10.0
    means = dict(zip(bg_tokens, acc.tolist()))
    for word in script.words:
        total = 0.0
        for year in decade.years:
            count = round(script.yearly_total * word.value(year))
            total += count * inv[year - y0]
        means[word.token] = total / 10.0
    return means


def oracle_flux(
    script: TrajectoryScript,
    years: tuple[int, int],
    threshold: float,
    first: Decade,
    second: Decade,
    *,
    above_inclusive: bool = True,
) -> tuple[set[str], set[str]]:
    """Crossing sets computed from the script alone, no corpus pass.

    Applies the same boundary rule as the flux module: upward means
    f1 < threshold <= f2 (or strict > when ``above_inclusive`` is off).
    """
    f1 = _decade_means(script, years, first)
    f2 = _decade_means(script, years, second)

    def above(v: float) -> bool:
        return v >= threshold if above_inclusive else v > threshold

    upward = {t for t, v in f2.items() if above(v) and not above(f1[t])}
    downward = {t for t, v in f1.items() if above(v) and not above(f2[t])}
    return upward, downward


def guard_band_tokens(
    script: TrajectoryScript,
    years: tuple[int, int],
    threshold: float,
    decades: Sequence[Decade],
) -> set[str]:
    """Tokens whose analytic decade mean sits within one count-quantum of the
    threshold in any of the given decades; equality assertions should skip
    them since count rounding can push them to either side."""
    quantum = 1.0 / script.yearly_total
    bg_tokens, _ = _background(script)
    ranks = np.arange(1, script.background_vocab + 1, dtype=np.float64)
    weights = ranks ** -script.zipf_exponent
    bg_freqs = weights / weights.sum()
    flagged: set[str] = set()
    for decade in decades:
        near = np.abs(bg_freqs - threshold) <= quantum
        flagged.update(t for t, hit in zip(bg_tokens, near.tolist()) if hit)
        for word in script.words:
            mean = sum(word.value(y) for y in decade.years) / 10.0
            if abs(mean - threshold) <= quantum:
                flagged.add(word.token)
    return flagged


def oracle_jsd(
    P: NormalizedDecadeDistribution | Mapping[str, float],
    Q: NormalizedDecadeDistribution | Mapping[str, float],
) -> float:
    """Direct three-entropy divergence with compensated accumulation.

    Test oracle only: an independent route to the same quantity computed by
    the divergence module.
    """
    p = P.as_dict() if isinstance(P, NormalizedDecadeDistribution) else {
        t: v for t, v in P.items() if v > 0.0
    }
    q = Q.as_dict() if isinstance(Q, NormalizedDecadeDistribution) else {
        t: v for t, v in Q.items() if v > 0.0
    }
    hp = math.fsum(-v * math.log2(v) for v in p.values())
    hq = math.fsum(-v * math.log2(v) for v in q.values())
    m_terms = []
    for token in p.keys() | q.keys():
        m = 0.5 * (p.get(token, 0.0) + q.get(token, 0.0))
        if m > 0.0:
            m_terms.append(-m * math.log2(m))
    hm = math.fsum(m_terms)
    return hm - 0.5 * (hp + hq)


def _kv_pairs(parts: list[str], line_no: int) -> dict[str, str]:
    pairs = {}
    for part in parts:
        if "=" not in part:
            raise InvalidScript(f"line {line_no}: expected key=value, got {part!r}")
        key, value = part.split("=", 1)
        if key in pairs:
            raise InvalidScript(f"line {line_no}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def parse_script(text: str) -> tuple[TrajectoryScript, tuple[int, int]]:
    """Parse the documented script format into (script, year range)."""
    years: tuple[int, int] | None = None
    background: dict[str, str] | None = None
    words: list[ScriptedWord] = []
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        directive = parts[0]
        try:
            if directive == "years":
                if len(parts) != 3:
                    raise InvalidScript(f"line {line_no}: years needs two values")
                years = (int(parts[1]), int(parts[2]))
            elif directive == "background":
                background = _kv_pairs(parts[1:], line_no)
            elif directive == "word":
                kv = _kv_pairs(parts[1:], line_no)
                words.append(
                    ScriptedWord(
                        token=kv["token"],
                        birth=int(kv["birth"]),
                        death=int(kv["death"]),
                        peak=float(kv["peak"]),
                        shape=kv.get("shape", "constant"),
                    )
                )
            else:
                raise InvalidScript(f"line {line_no}: unknown directive {directive!r}")
        except (KeyError, ValueError) as exc:
            raise InvalidScript(f"line {line_no}: {exc}") from None
    if years is None or background is None:
        raise InvalidScript("script needs both a 'years' and a 'background' line")
    try:
        script = TrajectoryScript(
            background_vocab=int(background["vocab"]),
            zipf_exponent=float(background["exponent"]),
            yearly_total=int(background["yearly_total"]),
            words=tuple(words),
        )
    except (KeyError, ValueError) as exc:
        raise InvalidScript(f"background line: {exc}") from None
    script.check_years(years)
    return script, years


def load_script(path: str | Path) -> tuple[TrajectoryScript, tuple[int, int]]:
    return parse_script(Path(path).read_text(encoding="utf-8"))


def format_script(script: TrajectoryScript, years: tuple[int, int]) -> str:
    """Inverse of parse_script."""
    lines = [
        f"years {years[0]} {years[1]}",
        f"background vocab={script.background_vocab} "
        f"exponent={script.zipf_exponent!r} yearly_total={script.yearly_total}",
    ]
    for w in script.words:
        lines.append(
            f"word token={w.token} birth={w.birth} death={w.death} "
            f"peak={w.peak!r} shape={w.shape}"
        )
    return "\n".join(lines) + "\n"
