import json
import subprocess
import sys

import pytest

from ifra import cli
from ifra.catalog import Direction, reference_catalog
from ifra.dataset import Dataset, Outcome, Split, SubjectRecord, load_dataset
from ifra.errors import NumericError
from ifra.scale import builtin_clinical_scales, ifra_published_scale
from ifra.synthetic import cohort_from_counts, planted_cohort

from fixtures.table4_counts import COUNTS

SUBCOMMANDS = ["ingest", "augment", "make-splits", "select", "derive", "assess", "evaluate", "compare", "demo"]


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def cohort_csv(tmp_path):
    path = tmp_path / "cohort.csv"
    planted_cohort(4).to_csv(path)
    return path


def test_help_lists_subcommands_and_flags(capsys):
    code, out, _ = run(["--help"], capsys)
    assert code == 0
    for name in SUBCOMMANDS:
        assert name in out
    code, out, _ = run(["select", "--help"], capsys)
    assert code == 0
    for flag in ("--seed", "--catalog", "--out", "--iterations", "--accuracy-gate", "--alpha",
                 "--relevance-threshold", "--noise-scale", "--count", "--workers"):
        assert flag in out


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["select"],
    ["make-splits", "--data", "nope.csv"],
    ["select", "--data", "x", "--iterations", "0"],
])
def test_usage_errors_exit_1(argv, capsys):
    assert run(argv, capsys)[0] == 1


def test_bad_pair_is_usage_error(cohort_csv, capsys):
    assert run(["make-splits", "--data", str(cohort_csv), "--test", "3"], capsys)[0] == 1


def test_data_errors_exit_2(tmp_path, cohort_csv, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("subject_id,outcome,synthetic,split\n")
    code, _, err = run(["ingest", "--data", str(bad)], capsys)
    assert code == 2 and "lacks catalog feature" in err
    nf_only = tmp_path / "nf.csv"
    ds = planted_cohort(0)
    ds.with_subjects(
        type(s)(s.subject_id, s.outcome, s.synthetic, Split.TEST, s.values) for s in ds if not s.is_faller
    ).to_csv(nf_only)
    code, _, err = run(["evaluate", "--data", str(nf_only), "--scale", "ifra"], capsys)
    assert code == 2 and "degenerate" in err
    code, _, err = run(["evaluate", "--data", str(cohort_csv), "--scale", str(tmp_path / "missing.json")], capsys)
    assert code == 2


def test_numeric_errors_exit_3(cohort_csv, capsys, monkeypatch):
    def boom(*a, **k):
        raise NumericError("overflow")

    monkeypatch.setattr(cli, "compare_scales", boom)
    code, _, err = run(["compare", "--data", str(cohort_csv), "--scale", "clinical", "--split", "all"], capsys)
    assert code == 3 and "overflow" in err


def test_assess_all_low_subject(tmp_path, capsys):
    cat = reference_catalog()
    scale = ifra_published_scale()
    values = {n: 0.0 for n in cat.names}
    for e in scale.entries:
        values[e.feature] = e.t_low + (0.5 if e.direction is Direction.HIGHER_SAFER else -0.5)
    Dataset(cat, (SubjectRecord("p1", Outcome.NON_FALLER, False, Split.TEST, values),)).to_csv(tmp_path / "t.csv")
    code, out, _ = run(["assess", "--scale", "ifra_published.json", "--data", str(tmp_path / "t.csv")], capsys)
    assert code == 0
    line = json.loads(out)
    assert line["subject_id"] == "p1" and line["stratum"] == "low"
    assert set(line["votes"].values()) == {"low"}


def test_pipeline_chain_with_manifests(tmp_path, cohort_csv, capsys):
    before = cohort_csv.read_bytes()
    split = tmp_path / "split.csv"
    aug = tmp_path / "aug.csv"
    sel = tmp_path / "sel.json"
    scale = tmp_path / "scale.json"
    ev = tmp_path / "ev.json"
    md = tmp_path / "ev.md"
    assert run(["make-splits", "--data", str(cohort_csv), "--seed", "1", "--out", str(split)], capsys)[0] == 0
    assert run(["--seed", "2", "augment", "--data", str(split), "--out", str(aug)], capsys)[0] == 0
    assert run(["select", "--data", str(aug), "--iterations", "50", "--out", str(sel)], capsys)[0] == 0
    assert run(["derive", "--data", str(aug), "--selection", str(sel), "--out", str(scale)], capsys)[0] == 0
    code, _, _ = run(["evaluate", "--data", str(aug), "--scale", str(scale), "--out", str(ev),
                      "--markdown", str(md)], capsys)
    assert code == 0
    assert cohort_csv.read_bytes() == before

    ds, _ = load_dataset(aug, reference_catalog())
    assert len(ds) == 142 and sum(s.synthetic for s in ds) == 15
    report = json.loads(ev.read_text())
    assert report[0]["scale"] == "IFRA (derived)"
    assert "| IFRA (derived) |" in md.read_text()

    manifest = json.loads((tmp_path / "aug.csv.manifest.json").read_text())
    assert manifest["command"] == "augment"
    assert manifest["seed"] == 2
    assert manifest["outputs"] == [str(aug)]
    assert manifest["config"]["count"] == 15
    assert list(manifest["inputs"]) == [str(split)]
    assert len(manifest["inputs"][str(split)]) == 64
    for path in (split, sel, scale, ev):
        assert (tmp_path / (path.name + ".manifest.json")).exists()


def test_subcommand_flag_overrides_group_flag(tmp_path, cohort_csv, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["--seed", "1", "make-splits", "--data", str(cohort_csv), "--seed", "9", "--out", str(a)], capsys)
    run(["make-splits", "--data", str(cohort_csv), "--seed", "9", "--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()
    assert json.loads((tmp_path / "a.csv.manifest.json").read_text())["seed"] == 9


def test_compare_prints_markdown_and_json(tmp_path, capsys):
    path = tmp_path / "t4.csv"
    cohort_from_counts(builtin_clinical_scales(), COUNTS).to_csv(path)
    code, out, err = run(["compare", "--data", str(path), "--catalog", "clinical", "--scale", "clinical"], capsys)
    assert code == 0
    assert [r["scale"] for r in json.loads(out)] == list(COUNTS)
    assert err.count("\n") == 10


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ifra.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout
