import json
import subprocess
import sys

import pytest

from i3kit import cli
from i3kit.aggregation import UnitKind
from i3kit.pipeline import Config, StageError, execute, run_pipeline

TABLES = ("rank_table.csv", "ztest.csv", "ri3r.csv", "indicators.csv", "homogeneity.net",
          "homogeneity_edges.csv", "homogeneity_cores.csv", "map_ztest.json", "map_skipped.csv",
          "skipped_records.csv")


def full_config(data_dir, outdir, **kw):
    return Config(inputs=(data_dir / "fixture.txt",), outdir=outdir, gazetteer=data_dir / "gazetteer.csv",
                  figures=False, **kw)


def test_full_run_writes_the_four_outputs(data_dir, tmp_path):
    out = execute(full_config(data_dir, tmp_path))
    for key in ("rank_table", "ztest", "pajek", "map"):
        assert out.outputs[key].is_file() and out.outputs[key].stat().st_size > 0
    meta = json.loads((tmp_path / "run.json").read_text())
    assert meta["records"] == 197 and meta["units"] == 8
    assert meta["overlap_multiplicity"] == 1.0
    assert str(tmp_path) not in (tmp_path / "run.json").read_text()


def test_rerun_from_persisted_scores_is_byte_identical(data_dir, tmp_path):
    execute(full_config(data_dir, tmp_path / "a"))
    cfg = full_config(data_dir, tmp_path / "b")
    cfg.inputs = ()
    cfg.records_csv = tmp_path / "a" / "records.csv"
    cfg.scored_csv = tmp_path / "a" / "scored.csv"
    execute(cfg)
    assert not (tmp_path / "b" / "scored.csv").exists()
    for name in TABLES:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


@pytest.mark.parametrize("unit", list(UnitKind))
def test_every_unit_kind_runs(data_dir, tmp_path, unit):
    cfg = full_config(data_dir, tmp_path, unit=unit, stages=("rank", "compare"))
    out = execute(cfg)
    assert out.meta["unit"] == unit.value
    assert (tmp_path / "rank_table.csv").read_text().count("\n") == min(20, out.meta["units"]) + 1


def test_fractional_counting_conserves(data_dir, tmp_path):
    out = execute(full_config(data_dir, tmp_path, unit=UnitKind.COUNTRY, counting="fractional",
                              stages=("rank",)))
    skipped = out.meta["skipped_records"]
    assert out.meta["overlap_multiplicity"] == pytest.approx((out.meta["records"] - skipped) / out.meta["records"])


def test_fractional_citations_and_kml(data_dir, tmp_path):
    out = execute(full_config(data_dir, tmp_path, links=data_dir / "links.csv", score_field="citation_score",
                              geo_format="kml", overlay="ri3r"))
    assert out.outputs["map"].name == "map_ri3r.kml"
    assert "fractional:" in " ".join(out.meta["provenance"])


def test_invalid_unit_is_a_config_error(data_dir, tmp_path, capsys):
    assert run_pipeline(full_config(data_dir, tmp_path, unit="planet")) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_input_is_a_config_error(tmp_path):
    assert run_pipeline(Config(inputs=(tmp_path / "nope.txt",), outdir=tmp_path)) == 2


def test_stage_errors_are_tagged(data_dir, tmp_path, capsys):
    (tmp_path / "links.csv").write_text("cited_id,citing_nrefs\nWOS:missing,3\n")
    assert run_pipeline(full_config(data_dir, tmp_path, links=tmp_path / "links.csv")) == 1
    assert "[ingest]" in capsys.readouterr().err
    cfg = full_config(data_dir, tmp_path, stages=("map",))
    cfg.gazetteer = None
    with pytest.raises(StageError) as err:
        execute(cfg)
    assert err.value.stage == "map"


def test_cli_subcommands(data_dir, tmp_path, capsys):
    fixture = str(data_dir / "fixture.txt")
    assert cli.main(["ingest", fixture, "-o", str(tmp_path / "r.csv")]) == 0
    assert cli.main(["fractional", str(tmp_path / "r.csv"), str(data_dir / "links.csv"),
                     "-o", str(tmp_path / "rf.csv")]) == 0
    assert cli.main(["--rule", "tieavg", "score", str(tmp_path / "rf.csv"), "-o", str(tmp_path / "s.csv"),
                     "--score-field", "citation_score"]) == 0
    assert cli.main(["rank", str(tmp_path / "rf.csv"), "--scored", str(tmp_path / "s.csv"),
                     "--outdir", str(tmp_path / "out"), "--no-figures", "--unit", "country"]) == 0
    assert cli.main(["compare", str(tmp_path / "r.csv"), "--outdir", str(tmp_path / "out"),
                     "--variable", "quantile"]) == 0
    assert cli.main(["map", fixture, "--gazetteer", str(data_dir / "gazetteer.csv"),
                     "--outdir", str(tmp_path / "out"), "--geo-format", "kml"]) == 0
    names = {p.name for p in (tmp_path / "out").iterdir()}
    assert {"rank_table.csv", "homogeneity.net", "map_ztest.kml"} <= names
    assert "197 records" in capsys.readouterr().out


def test_cli_usage_errors(data_dir, capsys):
    fixture = str(data_dir / "fixture.txt")
    for argv in (["rank", fixture, "--unit", "planet"], ["--mutz", "--rule", "leq", "rank", fixture],
                 ["--alpha", "1.5", "rank", fixture], ["map", fixture], []):
        with pytest.raises(SystemExit) as exc:
            cli.main(argv)
        assert exc.value.code == 2


def test_cli_runtime_error(tmp_path, capsys):
    (tmp_path / "bad.txt").write_text("SO\tPY\n")
    assert cli.main(["score", str(tmp_path / "bad.txt"), "-o", str(tmp_path / "s.csv")]) == 1
    assert "header tag 'DT'" in capsys.readouterr().err


def test_console_entry_point(data_dir, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "i3kit", "run", str(data_dir / "fixture.txt"),
                           "--gazetteer", str(data_dir / "gazetteer.csv"), "--outdir", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "shares.png").is_file() and (tmp_path / "pr6_profile.png").is_file()
