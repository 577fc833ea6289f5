"""Command-line entry point.

    i3kit ingest export.txt -o out/records.csv
    i3kit fractional out/records.csv links.csv -o out/records_frac.csv
    i3kit score out/records.csv -o out/scored.csv --rule tieavg
    i3kit rank out/records.csv --scored out/scored.csv --unit country --outdir out
    i3kit compare out/records.csv --alpha 0.05 --outdir out
    i3kit map out/records.csv --gazetteer cities.csv --overlay ri3r --outdir out
    i3kit run export.txt --gazetteer cities.csv --outdir out
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__, aggregation, inference, quantiles, records
from .errors import I3Error
from .pipeline import Config, load_records, run_pipeline
from .reporting import GeoFormat, Overlay

GLOBAL_DEFAULTS = {
    "rule": "strict",
    "mutz": False,
    "counting": "integer",
    "unit": "journal",
    "alpha": 0.05,
    "min_n": 5,
    "expect": "i3points",
    "overlay": "ztest",
    "score_field": "times_cited",
    "workers": 1,
    "top_k": 20,
    "verbose": False,
}


def _global_flags(defaults: bool) -> argparse.ArgumentParser:
    # the same flags work before or after the subcommand; only the top level
    # carries real defaults so a subparser never overwrites an earlier value
    p = argparse.ArgumentParser(add_help=False)
    d = (lambda k: GLOBAL_DEFAULTS[k]) if defaults else (lambda k: argparse.SUPPRESS)
    g = p.add_argument_group("global options")
    g.add_argument("--rule", choices=[r.value for r in quantiles.Rule], default=d("rule"),
                   help="tie convention for quantiles (default strict)")
    g.add_argument("--mutz", action="store_true", default=d("mutz"),
                   help="add 0.9 to strict-less quantiles")
    g.add_argument("--score-field", choices=[f.value for f in quantiles.ScoreField],
                   default=d("score_field"), help="score that orders papers within a stratum")
    g.add_argument("--counting", choices=[c.value for c in aggregation.Counting], default=d("counting"))
    g.add_argument("--unit", choices=[u.value for u in aggregation.UnitKind], default=d("unit"))
    g.add_argument("--alpha", type=float, default=d("alpha"), help="family-wise significance level")
    g.add_argument("--min-n", type=int, default=d("min_n"), help="smallest unit tested by RI3R")
    g.add_argument("--expect", choices=[e.value for e in inference.Expectation], default=d("expect"))
    g.add_argument("--overlay", choices=[o.value for o in Overlay], default=d("overlay"))
    g.add_argument("--workers", type=int, default=d("workers"), help="threads for pairwise tests")
    g.add_argument("--top-k", type=int, default=d("top_k"), help="rows in the rank table (0 = all)")
    g.add_argument("-v", "--verbose", action="store_true", default=d("verbose"))
    return p


def _add_pipeline_inputs(sp, needs_gazetteer=False):
    sp.add_argument("inputs", nargs="+", type=Path, help="exports or canonical record CSVs")
    sp.add_argument("--scored", type=Path, help="reuse a persisted scored-record CSV")
    sp.add_argument("--outdir", type=Path, default=Path("i3-out"))
    sp.add_argument("--links", type=Path, help="citation links for fractional citation counting")
    sp.add_argument("--journals", type=Path, help="file with one journal title per line")
    sp.add_argument("--aliases", type=Path, help="CSV of from_key,to_key unit aliases")
    sp.add_argument("--gazetteer", type=Path, required=needs_gazetteer, help="CSV city,country,lat,lon")
    sp.add_argument("--geo-format", choices=[f.value for f in GeoFormat], default="geojson")
    sp.add_argument("--variable", choices=["citations", "quantile"], default="citations",
                    help="values compared between units")
    sp.add_argument("--no-figures", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="i3kit", description="Percentile-based impact indicators for citation exports.",
                                 parents=[_global_flags(True)])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    flags = _global_flags(False)

    sp = sub.add_parser("ingest", parents=[flags], help="parse exports into a canonical record CSV")
    sp.add_argument("inputs", nargs="+", type=Path)
    sp.add_argument("-o", "--output", type=Path, required=True)
    sp.add_argument("--journals", type=Path)
    sp.add_argument("--all-types", action="store_true", help="keep non-citable document types")

    sp = sub.add_parser("fractional", parents=[flags], help="attach 1/NRef citation scores")
    sp.add_argument("records", type=Path)
    sp.add_argument("links", type=Path, help="CSV cited_id,citing_nrefs")
    sp.add_argument("-o", "--output", type=Path, required=True)

    sp = sub.add_parser("score", parents=[flags], help="percentile and PR6 class per record")
    sp.add_argument("records", type=Path)
    sp.add_argument("-o", "--output", type=Path, required=True)

    sp = sub.add_parser("rank", parents=[flags], help="indicator tables with significance flags")
    _add_pipeline_inputs(sp)
    sp = sub.add_parser("compare", parents=[flags], help="pairwise Mann-Whitney homogeneity graph")
    _add_pipeline_inputs(sp)
    sp = sub.add_parser("map", parents=[flags], help="city overlay for map viewers")
    _add_pipeline_inputs(sp, needs_gazetteer=True)
    sp = sub.add_parser("run", parents=[flags], help="every stage in one go")
    _add_pipeline_inputs(sp)
    return ap


def _read_any(paths) -> records.RecordSet:
    rs = None
    for p in paths:
        part = load_records(p)
        rs = part if rs is None else rs.merged(part)
    return rs


def _config(args, stages) -> Config:
    cfg = Config(
        inputs=tuple(args.inputs),
        outdir=args.outdir,
        scored_csv=args.scored,
        links=args.links,
        journals=args.journals,
        aliases=args.aliases,
        gazetteer=args.gazetteer,
        rule=quantiles.Rule(args.rule),
        mutz=args.mutz,
        score_field=quantiles.ScoreField(args.score_field),
        counting=aggregation.Counting(args.counting),
        unit=aggregation.UnitKind(args.unit),
        alpha=args.alpha,
        min_n=args.min_n,
        expect=inference.Expectation(args.expect),
        overlay=Overlay(args.overlay),
        geo_format=GeoFormat(args.geo_format),
        compare_variable=args.variable,
        top_k=args.top_k,
        workers=args.workers,
        figures=not args.no_figures,
        stages=stages,
    )
    if stages == ("rank", "compare", "map") and cfg.gazetteer is None:
        cfg.stages = ("rank", "compare")
    return cfg


def _simple(args) -> int:
    if args.command == "ingest":
        rs = _read_any(args.inputs)
        if not args.all_types:
            rs = records.filter_citable(rs)
        if args.journals:
            rs = records.filter_journals(rs, args.journals.read_text(encoding="utf-8-sig").splitlines())
        records.write_records(rs, args.output)
        print(f"{len(rs)} records -> {args.output}")
    elif args.command == "fractional":
        rs = records.apply_fractional_weights(load_records(args.records), records.read_links(args.links))
        records.write_records(rs, args.output)
        print(f"{len(rs)} records -> {args.output}")
    else:
        rule = quantiles.CountingRule(quantiles.Rule(args.rule), args.mutz)
        scored = quantiles.score_set(load_records(args.records), rule, quantiles.ScoreField(args.score_field))
        quantiles.write_scored(scored, args.output)
        print(f"{len(scored)} scored records -> {args.output}")
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.mutz and args.rule != "strict":
        ap.error("--mutz only applies to --rule strict")
    if not 0 < args.alpha < 1:
        ap.error("--alpha must lie in (0, 1)")
    if args.min_n < 1 or args.workers < 1 or args.top_k < 0:
        ap.error("--min-n and --workers must be positive, --top-k non-negative")

    if args.command in ("ingest", "fractional", "score"):
        try:
            return _simple(args)
        except (I3Error, OSError, ValueError) as exc:
            print(f"i3kit {args.command}: {exc}", file=sys.stderr)
            return 1

    stages = {"rank": ("rank",), "compare": ("compare",), "map": ("map",),
              "run": ("rank", "compare", "map")}[args.command]
    return run_pipeline(_config(args, stages))


if __name__ == "__main__":
    sys.exit(main())
