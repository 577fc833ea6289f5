"""End-to-end evaluation run: ingest, score, aggregate, indicate, flag, emit."""

from __future__ import annotations

import json
import logging
import sys
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import aggregation, indicators, inference, quantiles, records
from .errors import I3Error
from .reporting import figures, geo, pajek, tables

log = logging.getLogger(__name__)

RECORDS_CSV = "records.csv"
SCORED_CSV = "scored.csv"
RANK_TABLE = "rank_table.csv"
ZTEST_CSV = "ztest.csv"
RI3R_CSV = "ri3r.csv"
INDICATORS_CSV = "indicators.csv"
PAJEK_NET = "homogeneity.net"
EDGES_CSV = "homogeneity_edges.csv"
CORES_CSV = "homogeneity_cores.csv"
SKIPS_CSV = "skipped_records.csv"
GEO_SKIPS_CSV = "map_skipped.csv"
RUN_JSON = "run.json"


class StageError(I3Error):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class Config:
    inputs: Sequence[Path] = ()
    outdir: Path = Path("i3-out")
    records_csv: Optional[Path] = None   # skip ingestion
    scored_csv: Optional[Path] = None    # skip scoring
    links: Optional[Path] = None
    journals: Optional[Path] = None
    aliases: Optional[Path] = None
    gazetteer: Optional[Path] = None
    rule: quantiles.Rule = quantiles.Rule.STRICT_LESS
    mutz: bool = False
    score_field: quantiles.ScoreField = quantiles.ScoreField.TIMES_CITED
    counting: aggregation.Counting = aggregation.Counting.INTEGER
    unit: aggregation.UnitKind = aggregation.UnitKind.JOURNAL
    alpha: float = 0.05
    min_n: int = indicators.RI3R_MIN_N
    expect: inference.Expectation = inference.Expectation.I3_POINTS
    overlay: geo.Overlay = geo.Overlay.ZTEST
    geo_format: geo.GeoFormat = geo.GeoFormat.GEOJSON
    compare_variable: str = "citations"
    top_k: int = 20
    workers: int = 1
    figures: bool = True
    doc_types: Sequence[str] = tuple(sorted(records.CITABLE))
    stages: Sequence[str] = ("rank", "compare", "map")

    def counting_rule(self) -> quantiles.CountingRule:
        return quantiles.CountingRule(quantiles.Rule(self.rule), self.mutz)

    def validate(self) -> None:
        self.counting_rule()
        aggregation.UnitKind(self.unit)
        aggregation.Counting(self.counting)
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.min_n < 1:
            raise ValueError("min-n must be positive")
        if self.compare_variable not in ("citations", "quantile"):
            raise ValueError("compare variable must be 'citations' or 'quantile'")
        sources = [self.records_csv] if self.records_csv else list(self.inputs)
        if not sources:
            raise ValueError("no input records given")
        for p in sources + [self.scored_csv, self.links, self.journals, self.aliases]:
            if p is not None and not Path(p).is_file():
                raise FileNotFoundError(f"input not found: {p}")
        if "map" in self.stages and self.gazetteer and not Path(self.gazetteer).is_file():
            raise FileNotFoundError(f"gazetteer not found: {self.gazetteer}")


@dataclass
class Outcome:
    outputs: dict[str, Path] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


def _stage(name):
    def wrap(fn):
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except (I3Error, OSError, ValueError, KeyError) as exc:
                raise StageError(name, exc) from exc
        return inner
    return wrap


def load_records(path) -> records.RecordSet:
    """Canonical record CSV or raw export, told apart by the header line."""
    with open(path, encoding="utf-8-sig") as fh:
        first = fh.readline()
    if first.startswith("record_id,"):
        return records.read_records(path)
    return records.parse_export(path)


@_stage("ingest")
def ingest(cfg: Config) -> records.RecordSet:
    rs = None
    for path in cfg.inputs:
        part = load_records(path)
        rs = part if rs is None else rs.merged(part)
    if rs is None:
        raise ValueError("no input files")
    # links are resolved against the full download, before anything is filtered out
    if cfg.links:
        rs = records.apply_fractional_weights(rs, records.read_links(cfg.links))
    rs = records.filter_citable(rs, cfg.doc_types)
    if cfg.journals:
        names = Path(cfg.journals).read_text(encoding="utf-8-sig").splitlines()
        rs = records.filter_journals(rs, names)
    return rs


@_stage("score")
def score(cfg: Config, rs: records.RecordSet, path: Path) -> list[quantiles.ScoredRecord]:
    scored = quantiles.score_set(rs, cfg.counting_rule(), cfg.score_field)
    quantiles.write_scored(scored, path)
    # downstream always works from the persisted values, so reruns match byte for byte
    return quantiles.read_scored(path)


@_stage("aggregate")
def aggregate(rs, scored, kind, counting, aliases_path=None):
    aliases = aggregation.read_aliases(aliases_path) if aliases_path else None
    scored_ids = {s.record_id for s in scored}
    missing = [r.record_id for r in rs if r.record_id not in scored_ids]
    if missing:
        raise KeyError(f"{len(missing)} records have no score, e.g. {missing[0]!r}")
    assignments, skipped = aggregation.assign_units(rs, kind, counting, aliases)
    return aggregation.unit_subsets(assignments, scored), skipped


@_stage("indicate")
def indicate(cfg: Config, units, scored):
    stats = indicators.ReferenceStats.of(scored)
    results = indicators.indicator_report(units, scored, cfg.min_n)
    return stats, inference.flag_results(results, stats, cfg.expect)


def _class_counts(members) -> list[float]:
    counts = Counter()
    for w in indicators.as_weighted(members):
        counts[w.record.pr6_class] += w.weight
    return [float(counts.get(c, 0)) for c in range(1, 7)]


@_stage("emit")
def emit_rank(cfg, out: Outcome, units, scored, stats, flagged):
    d = Path(cfg.outdir)
    tables.write_indicators(flagged, d / INDICATORS_CSV)
    tables.emit_rank_table(flagged, d / RANK_TABLE, cfg.top_k)
    tables.emit_ztest(flagged, d / ZTEST_CSV, cfg.expect, stats.n)
    tables.emit_ri3r(flagged, float(stats.mean_quantile), d / RI3R_CSV)
    out.outputs.update(indicators=d / INDICATORS_CSV, rank_table=d / RANK_TABLE,
                       ztest=d / ZTEST_CSV, ri3r=d / RI3R_CSV)
    if cfg.figures:
        out.outputs["shares_figure"] = figures.plot_shares(flagged, stats.n, d / "shares.png", cfg.top_k)
        top = [f.unit_id for f in flagged[:5]]
        out.outputs["pr6_figure"] = figures.plot_pr6_profile(
            {u: _class_counts(units[u]) for u in top}, d / "pr6_profile.png")


@_stage("compare")
def compare(cfg, out: Outcome, units):
    samples = {}
    for key, members in units.items():
        recs = [w.record for w in indicators.as_weighted(members)]
        if cfg.compare_variable == "citations":
            samples[key] = [r.times_cited for r in recs]
        else:
            samples[key] = [float(r.quantile) for r in recs]
    if len(samples) < 2:
        log.warning("fewer than two units; no homogeneity graph")
        return None
    graph = inference.homogeneity_graph(samples, cfg.alpha, cfg.workers)
    d = Path(cfg.outdir)
    pajek.emit_pajek(graph, d / PAJEK_NET)
    tables.emit_edges(graph, d / EDGES_CSV)
    tables.emit_cores(graph, d / CORES_CSV)
    out.outputs.update(pajek=d / PAJEK_NET, edges=d / EDGES_CSV, cores=d / CORES_CSV)
    out.meta["graph"] = {
        "nodes": len(graph.nodes),
        "edges": len(graph.edges),
        "alpha_family": graph.alpha_family,
        "max_core": max(graph.core_number.values(), default=0),
    }
    return graph


@_stage("map")
def make_map(cfg, out: Outcome, rs, scored):
    if cfg.gazetteer is None:
        raise geo.GazetteerMissing("the map stage needs --gazetteer")
    gaz = geo.Gazetteer.load(cfg.gazetteer)
    # the overlay is always per city, whatever unit the tables use
    units, _ = aggregate(rs, scored, aggregation.UnitKind.CITY, cfg.counting, cfg.aliases)
    _, flagged = indicate(cfg, units, scored)
    cities, small = geo.city_results(flagged, cfg.overlay, cfg.min_n)
    d = Path(cfg.outdir)
    suffix = "json" if geo.GeoFormat(cfg.geo_format) is geo.GeoFormat.GEOJSON else "kml"
    path = d / f"map_{geo.Overlay(cfg.overlay).value}.{suffix}"
    nodes, missing = geo.emit_geo_overlay(cities, gaz, path, cfg.geo_format)
    geo.write_geo_skips(small + missing, d / GEO_SKIPS_CSV)
    out.outputs.update(map=path, map_skipped=d / GEO_SKIPS_CSV)
    out.meta["map"] = {"features": len(nodes), "skipped": len(small) + len(missing)}


def execute(cfg: Config) -> Outcome:
    cfg.validate()
    d = Path(cfg.outdir)
    d.mkdir(parents=True, exist_ok=True)
    out = Outcome()

    if cfg.records_csv:
        rs = _stage("ingest")(records.read_records)(cfg.records_csv)
    else:
        rs = ingest(cfg)
        records.write_records(rs, d / RECORDS_CSV)
        out.outputs["records"] = d / RECORDS_CSV
    if not len(rs):
        raise StageError("ingest", ValueError("no citable records"))

    if cfg.scored_csv:
        scored = _stage("score")(quantiles.read_scored)(cfg.scored_csv)
    else:
        scored = score(cfg, rs, d / SCORED_CSV)
        out.outputs["scored"] = d / SCORED_CSV

    strata = quantiles.stratify(rs)
    units, skipped = aggregate(rs, scored, cfg.unit, cfg.counting, cfg.aliases)
    aggregation.write_skips(skipped, d / SKIPS_CSV)
    out.outputs["skipped"] = d / SKIPS_CSV
    stats, flagged = indicate(cfg, units, scored)

    if "rank" in cfg.stages:
        emit_rank(cfg, out, units, scored, stats, flagged)
    if "compare" in cfg.stages:
        compare(cfg, out, units)
    if "map" in cfg.stages:
        make_map(cfg, out, rs, scored)

    out.meta.update({
        "records": len(rs),
        "doc_types": dict(sorted(rs.doc_type_counts().items())),
        "rule": cfg.counting_rule().describe(),
        "score_field": quantiles.ScoreField(cfg.score_field).value,
        "unit": aggregation.UnitKind(cfg.unit).value,
        "counting": aggregation.Counting(cfg.counting).value,
        "expect": inference.Expectation(cfg.expect).value,
        "units": len(units),
        "overlap_multiplicity": round(indicators.overlap_multiplicity(units, scored), 6),
        "skipped_records": len(skipped),
        "small_strata": [list(s.key) + [s.size] for s in quantiles.small_strata(strata)],
        "i3_total": round(float(stats.i3), 4),
        "mean_quantile": round(float(stats.mean_quantile), 4),
        "provenance": list(rs.provenance),
    })
    meta_path = d / RUN_JSON
    meta_path.write_text(json.dumps(out.meta, indent=2, default=str) + "\n", encoding="utf-8")
    out.outputs["run"] = meta_path
    return out


def run_pipeline(cfg: Config) -> int:
    """Run and map failures to exit codes: 0 ok, 1 runtime failure, 2 bad config."""
    try:
        cfg.validate()
    except (ValueError, FileNotFoundError) as exc:
        print(f"i3kit: config error: {exc}", file=sys.stderr)
        return 2
    try:
        execute(cfg)
    except StageError as exc:
        print(f"i3kit: {exc}", file=sys.stderr)
        return 1
    return 0
