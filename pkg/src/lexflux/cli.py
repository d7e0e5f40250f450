"""Command-line surface: build decade tables and emit analysis reports.

Subcommands: build, totals, jsd, contributions, flux, flux-volumes,
rank-thresholds, lifecycle, synth. CSV is the canonical output and, like
JSON, is byte-deterministic for identical inputs and options; SVG output is
presentation-only (its generation timestamp comment is excluded from the
determinism guarantee). Every report embeds the resolved configuration and
the source table digest for provenance.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import IO, Sequence

from . import __version__, svg
from ._kernels import BACKEND
from .corpus import (
    Decade,
    DecadeTable,
    build_decade_table_from_shards,
    export_tsv,
    load_table,
    save_table,
)
from .divergence import contribution_report, rising_fraction_series
from .errors import LexfluxError
from .flux import flux_volume_series, rank_threshold_frequency, threshold_flux
from .ingest import TokenFilter, parse_totals
from .lifecycle import boundary_experiment
from .synth import load_script, write_corpus

logger = logging.getLogger(__name__)

DEFAULT_RANGE = (1820, 1999)
DEFAULT_THRESHOLDS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7)
DEFAULT_TOP_K = 60
DEFAULT_ENDPOINTS = "1950s,1970s,1990s"
DEFAULT_RANKS = (1, 10, 100, 1000, 10000)


def _parse_year_range(text: str) -> tuple[Decade, Decade]:
    try:
        lo_s, hi_s = text.split(":")
        lo, hi = int(lo_s), int(hi_s)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"range must look like 1820:1999, got {text!r}"
        ) from None
    if lo % 10 != 0 or hi % 10 != 9 or lo > hi:
        raise argparse.ArgumentTypeError(
            "range must start a decade and end one (e.g. 1820:1999)"
        )
    return Decade(lo), Decade(hi - 9)


def _parse_decade(text: str) -> Decade:
    try:
        return Decade.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _parse_formats(text: str) -> tuple[str, ...]:
    formats = tuple(part.strip() for part in text.split(",") if part.strip())
    for fmt in formats:
        if fmt not in ("csv", "json", "svg"):
            raise argparse.ArgumentTypeError(f"unknown format {fmt!r}")
    return formats


def _parse_thresholds(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad threshold list {text!r}") from None


def _provenance(command: str, table: DecadeTable | None, options: dict) -> dict:
    info = {
        "command": command,
        "tool": f"lexflux {__version__}",
        "options": options,
    }
    if table is not None:
        info["table_digest"] = table.content_digest()
        info["table_range"] = f"{table.decades[0]}..{table.decades[-1]}"
    return info


def _write_csv(
    path: Path, provenance: dict, header: Sequence[str], rows: Sequence[Sequence]
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fobj:
        fobj.write(f"# provenance: {json.dumps(provenance, sort_keys=True)}\n")
        writer = csv.writer(fobj, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {path}")


def _write_json(path: Path, provenance: dict, payload) -> None:
    with open(path, "w", encoding="utf-8") as fobj:
        json.dump(
            {"provenance": provenance, "data": payload},
            fobj,
            sort_keys=True,
            indent=2,
        )
        fobj.write("\n")
    print(f"wrote {path}")


def _write_svg(path: Path, content: str) -> None:
    Path(path).write_text(content, encoding="utf-8")
    print(f"wrote {path}")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_table_arg(args) -> DecadeTable:
    return load_table(Path(args.table))


def _token_filter(args) -> TokenFilter:
    return TokenFilter(
        exclude_pos_tagged=not args.keep_pos_tags,
        exclude_year_tokens=args.drop_year_tokens,
        custom_exclusions=frozenset(args.exclude_token or ()),
    )


def _cmd_build(args) -> int:
    first, last = args.range
    token_filter = _token_filter(args)
    totals = parse_totals(Path(args.totals))
    table, stats = build_decade_table_from_shards(
        [Path(p) for p in args.shards],
        totals,
        first,
        last,
        token_filter,
    )
    out = Path(args.out)
    if out.parent != Path():
        out.parent.mkdir(parents=True, exist_ok=True)
    digest = save_table(table, out)
    summary = {
        "table": str(out),
        "digest": digest,
        "decades": [str(d) for d in table.decades],
        "tokens": table.n_tokens,
        "ingest_stats": stats.as_dict(),
        "filter": {
            "exclude_pos_tagged": token_filter.exclude_pos_tagged,
            "exclude_year_tokens": token_filter.exclude_year_tokens,
            "custom_exclusions": sorted(token_filter.custom_exclusions),
        },
        "kernel_backend": BACKEND,
    }
    stats_path = out.with_suffix(out.suffix + ".stats.json")
    with open(stats_path, "w", encoding="utf-8") as fobj:
        json.dump(summary, fobj, sort_keys=True, indent=2)
        fobj.write("\n")
    print(f"wrote {out}")
    print(f"wrote {stats_path}")
    print(
        f"lines={stats.lines_read} kept={stats.kept} "
        f"filtered={stats.filtered} malformed={stats.malformed} "
        f"tokens={table.n_tokens}"
    )
    if args.export_tsv:
        export_tsv(table, Path(args.export_tsv))
        print(f"wrote {args.export_tsv}")
    return 0


def _cmd_totals(args) -> int:
    totals = parse_totals(Path(args.totals))
    out = _out_dir(args)
    prov = _provenance("totals", None, {"totals": str(args.totals)})
    rows = []
    for year, (mc, vc) in totals.items():
        log10 = math.log10(mc) if mc > 0 else None
        rows.append((year, mc, vc, log10 if log10 is not None else ""))
    if "csv" in args.format:
        _write_csv(
            out / "totals.csv",
            prov,
            ("year", "match_count", "volume_count", "log10_match_count"),
            rows,
        )
    if "json" in args.format:
        payload = [
            {"year": y, "match_count": mc, "volume_count": vc}
            for y, (mc, vc) in totals.items()
        ]
        _write_json(out / "totals.json", prov, payload)
    if "svg" in args.format:
        years = [str(y) for y, _ in totals.items()]
        values = [
            math.log10(mc) if mc > 0 else None for _, (mc, vc) in totals.items()
        ]
        chart = svg.line_chart(
            years,
            [svg.Series("log10 total 1-grams", values)],
            title="Total 1-gram counts per year (log10)",
            y_label="log10 count",
        )
        _write_svg(out / "totals.svg", chart)
    return 0


def _cmd_jsd(args) -> int:
    table = _load_table_arg(args)
    out = _out_dir(args)
    points = rising_fraction_series(table, args.gap)
    prov = _provenance("jsd", table, {"gap": args.gap})
    rows = [
        (
            str(p.first),
            str(p.second),
            p.jsd_bits,
            p.rising_fraction if p.rising_fraction is not None else "",
        )
        for p in points
    ]
    stem = f"jsd_gap{args.gap}"
    if "csv" in args.format:
        _write_csv(
            out / f"{stem}.csv",
            prov,
            ("first", "second", "jsd_bits", "rising_fraction"),
            rows,
        )
    if "json" in args.format:
        payload = [
            {
                "first": str(p.first),
                "second": str(p.second),
                "jsd_bits": p.jsd_bits,
                "rising_fraction": p.rising_fraction,
            }
            for p in points
        ]
        _write_json(out / f"{stem}.json", prov, payload)
    if "svg" in args.format:
        labels = [str(p.first) for p in points]
        fractions = [
            100.0 * p.rising_fraction if p.rising_fraction is not None else None
            for p in points
        ]
        chart = svg.line_chart(
            labels,
            [svg.Series(f"gap {args.gap}", fractions)],
            title="Share of divergence from words rising in frequency",
            y_label="percent of JSD",
        )
        _write_svg(out / f"{stem}.svg", chart)
    return 0


def _cmd_contributions(args) -> int:
    table = _load_table_arg(args)
    first, second = args.pair
    out = _out_dir(args)
    top_k = None if args.top_k == 0 else args.top_k
    report = contribution_report(table, first, second, top_k)
    prov = _provenance(
        "contributions",
        table,
        {"pair": [str(first), str(second)], "top_k": args.top_k},
    )
    stem = f"contributions_{first.start_year}_{second.start_year}"
    if "csv" in args.format:
        _write_csv(
            out / f"{stem}.csv",
            prov,
            ("token", "p", "q", "contribution_bits", "direction"),
            report.to_rows(),
        )
    if "json" in args.format:
        payload = {
            "first": str(first),
            "second": str(second),
            "total_jsd_bits": report.total_jsd,
            "rising_fraction": report.rising_fraction,
            "no_divergence": report.no_divergence,
            "contributions": [
                {
                    "token": c.token,
                    "p": c.p,
                    "q": c.q,
                    "contribution_bits": c.value,
                    "direction": c.direction,
                }
                for c in report.contributions
            ],
        }
        _write_json(out / f"{stem}.json", prov, payload)
    if "svg" in args.format:
        entries = [
            (c.token, c.value, c.direction == "rising")
            for c in report.contributions
        ]
        chart = svg.diverging_bar_chart(
            entries,
            title=f"Top divergence contributions, {first} to {second}",
            subtitle=f"total {report.total_jsd:.6f} bits; "
            f"right bars rose, left bars fell",
        )
        _write_svg(out / f"{stem}.svg", chart)
    return 0


def _exclude_years_arg(args) -> bool | None:
    return {"auto": None, "on": True, "off": False}[args.exclude_years]


def _cmd_flux(args) -> int:
    table = _load_table_arg(args)
    first, second = args.pair
    out = _out_dir(args)
    report = threshold_flux(
        table, first, second, args.threshold, _exclude_years_arg(args)
    )
    prov = _provenance(
        "flux",
        table,
        {
            "pair": [str(first), str(second)],
            "threshold": args.threshold,
            "exclude_years": report.years_excluded,
            "top_k": args.top_k,
        },
    )
    shown = report.top(None if args.top_k == 0 else args.top_k)
    rows = [
        (c.direction, c.token, c.f1, c.f2, c.jsd_contribution) for c in shown
    ]
    stem = f"flux_{args.threshold:g}_{first.start_year}_{second.start_year}"
    if "csv" in args.format:
        _write_csv(
            out / f"{stem}.csv",
            prov,
            ("direction", "token", "f1", "f2", "contribution_bits"),
            rows,
        )
    if "json" in args.format:
        payload = {
            "first": str(first),
            "second": str(second),
            "threshold": args.threshold,
            "upward_count": report.upward_count,
            "downward_count": report.downward_count,
            "percent_of_pair_jsd": report.percent_of_pair_jsd,
            "pair_jsd_bits": report.pair_jsd,
            "years_excluded": report.years_excluded,
            "crossings": [
                {
                    "direction": c.direction,
                    "token": c.token,
                    "f1": c.f1,
                    "f2": c.f2,
                    "contribution_bits": c.jsd_contribution,
                }
                for c in shown
            ],
        }
        _write_json(out / f"{stem}.json", prov, payload)
    if "svg" in args.format:
        entries = [
            (c.token, c.jsd_contribution, c.direction == "upward") for c in shown
        ]
        chart = svg.diverging_bar_chart(
            entries,
            title=f"Words crossing {args.threshold:g}, {first} to {second}",
            subtitle=f"{report.percent_of_pair_jsd:.2f}% of pair JSD; "
            f"right bars rose above, left bars fell below",
        )
        _write_svg(out / f"{stem}.svg", chart)
    return 0


def _cmd_flux_volumes(args) -> int:
    table = _load_table_arg(args)
    out = _out_dir(args)
    cells = flux_volume_series(table, args.thresholds, args.exclude_years)
    prov = _provenance(
        "flux-volumes",
        table,
        {"thresholds": list(args.thresholds), "exclude_years": args.exclude_years},
    )
    rows = [
        (str(c.first), str(c.second), c.threshold, c.upward, c.downward)
        for c in cells
    ]
    if "csv" in args.format:
        _write_csv(
            out / "flux_volumes.csv",
            prov,
            ("first", "second", "threshold", "upward", "downward"),
            rows,
        )
    if "json" in args.format:
        payload = [
            {
                "first": str(c.first),
                "second": str(c.second),
                "threshold": c.threshold,
                "upward": c.upward,
                "downward": c.downward,
            }
            for c in cells
        ]
        _write_json(out / "flux_volumes.json", prov, payload)
    if "svg" in args.format:
        pairs = sorted({(c.first, c.second) for c in cells})
        labels = [str(p[0]) for p in pairs]
        series = []
        for threshold in args.thresholds:
            for direction in ("upward", "downward"):
                values = []
                for pair in pairs:
                    cell = next(
                        c
                        for c in cells
                        if (c.first, c.second) == pair and c.threshold == threshold
                    )
                    count = getattr(cell, direction)
                    values.append(math.log10(count) if count > 0 else None)
                series.append(svg.Series(f"{threshold:g} {direction}", values))
        chart = svg.line_chart(
            labels,
            series,
            title="Words crossing relative-frequency thresholds (log10)",
            y_label="log10 count",
        )
        _write_svg(out / "flux_volumes.svg", chart)
    return 0


def _cmd_rank_thresholds(args) -> int:
    table = _load_table_arg(args)
    out = _out_dir(args)
    prov = _provenance("rank-thresholds", table, {"ranks": list(args.ranks)})
    rows = []
    for decade in table.decades:
        for rank in args.ranks:
            vocab = table.vocabulary_size(decade)
            if rank > vocab:
                continue
            rows.append(
                (str(decade), rank, rank_threshold_frequency(table, decade, rank))
            )
    if "csv" in args.format:
        _write_csv(
            out / "rank_thresholds.csv",
            prov,
            ("decade", "rank", "relative_frequency"),
            rows,
        )
    if "json" in args.format:
        payload = [
            {"decade": d, "rank": r, "relative_frequency": f} for d, r, f in rows
        ]
        _write_json(out / "rank_thresholds.json", prov, payload)
    if "svg" in args.format:
        labels = [str(d) for d in table.decades]
        series = []
        for rank in args.ranks:
            values = []
            for decade in table.decades:
                match = [f for d, r, f in rows if d == str(decade) and r == rank]
                values.append(math.log10(match[0]) if match else None)
            series.append(svg.Series(f"rank {rank}", values))
        chart = svg.line_chart(
            labels,
            series,
            title="Frequency at fixed rank per decade (log10)",
            y_label="log10 relative frequency",
        )
        _write_svg(out / "rank_thresholds.svg", chart)
    return 0


def _cmd_lifecycle(args) -> int:
    table = _load_table_arg(args)
    out = _out_dir(args)
    endpoints = [Decade.parse(part) for part in args.endpoints.split(",")]
    results = boundary_experiment(
        table,
        endpoints,
        median_fraction=args.median_fraction,
    )
    prov = _provenance(
        "lifecycle",
        table,
        {
            "endpoints": [str(e) for e in endpoints],
            "median_fraction": args.median_fraction,
        },
    )
    rows = []
    for endpoint, result in results.items():
        for decade, births, deaths, unique, birth_rate, death_rate in result.rows():
            rows.append(
                (
                    str(decade),
                    births,
                    deaths,
                    unique,
                    birth_rate,
                    death_rate,
                    str(endpoint),
                )
            )
    if "csv" in args.format:
        _write_csv(
            out / "lifecycle.csv",
            prov,
            (
                "decade",
                "births",
                "deaths",
                "unique_words",
                "birth_rate",
                "death_rate",
                "endpoint",
            ),
            rows,
        )
    if "json" in args.format:
        payload = [
            {
                "decade": r[0],
                "births": r[1],
                "deaths": r[2],
                "unique_words": r[3],
                "birth_rate": r[4],
                "death_rate": r[5],
                "endpoint": r[6],
            }
            for r in rows
        ]
        _write_json(out / "lifecycle.json", prov, payload)
    if "svg" in args.format:
        labels = [str(d) for d in table.decades]
        panels = []
        for which, attr in (("Birth rates", "birth_rates"), ("Death rates", "death_rates")):
            series = []
            for endpoint, result in results.items():
                by_decade = dict(zip(result.decades, getattr(result, attr)))
                values = [
                    float(by_decade[d]) if d in by_decade else None
                    for d in table.decades
                ]
                series.append(svg.Series(f"end {endpoint}", values))
            panels.append((which, "rate", series))
        chart = svg.multi_panel_line_chart(
            labels, panels, title="Birth and death rates by end-of-window choice"
        )
        _write_svg(out / "lifecycle.svg", chart)
    return 0


def _cmd_synth(args) -> int:
    script, years = load_script(Path(args.script))
    out = _out_dir(args)
    shard_paths, totals_path = write_corpus(
        script,
        years,
        out,
        seed=args.seed,
        shards=args.shards,
        compress=args.gzip,
    )
    for path in shard_paths:
        print(f"wrote {path}")
    print(f"wrote {totals_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexflux",
        description="Decade-scale lexical dynamics for 1-gram corpus data.",
    )
    parser.add_argument("--version", action="version", version=f"lexflux {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_formats(p, default="csv,json"):
        p.add_argument(
            "--format",
            type=_parse_formats,
            default=_parse_formats(default),
            help=f"comma list of csv,json,svg (default {default})",
        )
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("build", help="aggregate shards into a decade-table cache")
    p.add_argument("--shards", nargs="+", required=True, help="shard TSV/.gz paths")
    p.add_argument("--totals", required=True, help="total-counts file")
    p.add_argument(
        "--range",
        type=_parse_year_range,
        default=_parse_year_range(f"{DEFAULT_RANGE[0]}:{DEFAULT_RANGE[1]}"),
        help="year range, first:last (default 1820:1999)",
    )
    p.add_argument("--out", required=True, help="table cache file to write")
    p.add_argument("--keep-pos-tags", action="store_true", help="keep POS-tagged grams")
    p.add_argument(
        "--drop-year-tokens",
        action="store_true",
        help="also filter calendar-year tokens at ingest",
    )
    p.add_argument(
        "--exclude-token", action="append", help="literal token to drop (repeatable)"
    )
    p.add_argument("--export-tsv", help="also write the TSV export here")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("totals", help="report per-year total 1-gram counts")
    p.add_argument("--totals", required=True)
    add_formats(p)
    p.set_defaults(func=_cmd_totals)

    p = sub.add_parser("jsd", help="divergence and rising fraction per decade pair")
    p.add_argument("--table", required=True)
    p.add_argument("--gap", type=int, default=1, help="decades between pair members")
    add_formats(p)
    p.set_defaults(func=_cmd_jsd)

    p = sub.add_parser("contributions", help="ranked per-word divergence decomposition")
    p.add_argument("--table", required=True)
    p.add_argument(
        "--pair", nargs=2, type=_parse_decade, required=True, metavar=("FIRST", "SECOND")
    )
    p.add_argument("--top-k", type=int, default=DEFAULT_TOP_K, help="0 keeps all")
    add_formats(p)
    p.set_defaults(func=_cmd_contributions)

    p = sub.add_parser("flux", help="words crossing a threshold between two decades")
    p.add_argument("--table", required=True)
    p.add_argument(
        "--pair", nargs=2, type=_parse_decade, required=True, metavar=("FIRST", "SECOND")
    )
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument(
        "--exclude-years",
        choices=("auto", "on", "off"),
        default="auto",
        help="drop year-like tokens (auto: at thresholds <= 1e-5)",
    )
    p.add_argument("--top-k", type=int, default=DEFAULT_TOP_K, help="0 keeps all")
    add_formats(p)
    p.set_defaults(func=_cmd_flux)

    p = sub.add_parser("flux-volumes", help="crossing counts over a threshold grid")
    p.add_argument("--table", required=True)
    p.add_argument(
        "--thresholds",
        type=_parse_thresholds,
        default=DEFAULT_THRESHOLDS,
        help="comma list (default 1e-2..1e-7)",
    )
    p.add_argument(
        "--exclude-years", choices=("auto", "on", "off"), default="auto"
    )
    add_formats(p)
    p.set_defaults(func=_cmd_flux_volumes)

    p = sub.add_parser("rank-thresholds", help="frequency at fixed ranks per decade")
    p.add_argument("--table", required=True)
    p.add_argument(
        "--ranks",
        type=lambda s: tuple(int(x) for x in s.split(",")),
        default=DEFAULT_RANKS,
    )
    add_formats(p)
    p.set_defaults(func=_cmd_rank_thresholds)

    p = sub.add_parser("lifecycle", help="birth/death rates under endpoint choices")
    p.add_argument("--table", required=True)
    p.add_argument("--endpoints", default=DEFAULT_ENDPOINTS)
    p.add_argument("--median-fraction", type=float, default=0.05)
    add_formats(p)
    p.set_defaults(func=_cmd_lifecycle)

    p = sub.add_parser("synth", help="write a scripted synthetic corpus")
    p.add_argument("script", help="trajectory script file")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("--gzip", action="store_true")
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except LexfluxError as exc:
        print(f"lexflux: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"lexflux: i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
