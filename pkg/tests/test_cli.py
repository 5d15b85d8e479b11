import json

import pytest

from natdual.cli import main


@pytest.fixture(autouse=True)
def cache_dir(tmp_path, monkeypatch):
    d = tmp_path / "cache"
    monkeypatch.setenv("DW_CACHE_DIR", str(d))
    return d


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_duality_passes(capsys):
    code, out, _ = run(capsys, "check", "duality", "--algebra", "dl-3", "--ego", "three-T")
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "iso" and rep["scope"] == "finite-level"
    assert {"command", "inputs", "verdict", "witness", "bounds", "elapsed_ms"} <= set(rep)
    assert all(set(i) >= {"id", "digest"} for i in rep["inputs"])


def test_failed_check_exit_1(capsys):
    code, _, _ = run(capsys, "duality", "--algebra", "dl-2", "--ego", "three-T", "--expect", "notSurjective")
    assert code == 1


def test_malformed_file_exit_2(capsys, tmp_path):
    f = tmp_path / "bad.dw"
    f.write_text("algebra a { size 2 op j/2 = [0 1 2 1] }")
    code, _, err = run(capsys, "check", str(f))
    assert code == 2 and "value 2 exceeds carrier 2" in err
    assert run(capsys, "parse", str(f))[0] == 2


def test_usage_error_exit_2(capsys):
    assert run(capsys, "duality", "--algebra", "dl-3")[0] == 2
    assert run(capsys, "duality", "--algebra", "nope", "--ego", "three-T")[0] == 2


def test_manifest_filter(capsys):
    code, out, _ = run(capsys, "check", "manifest", "--filter", "double-stone")
    rep = json.loads(out)
    assert code == 0 and rep["total"] == rep["passed"] > 0
    assert all("double-stone" in r["id"] for r in rep["results"])


def test_cache_serves_identical_bytes(capsys, cache_dir):
    args = ("endoprimal", "--algebra", "lat-2", "--k", "3")
    _, first, _ = run(capsys, *args)
    assert len(list(cache_dir.glob("*.json"))) == 1
    _, second, _ = run(capsys, *args)
    assert first == second


def test_corrupt_cache_recomputed(capsys, cache_dir, caplog):
    args = ("free-algebra", "--algebra", "lat-2", "--k", "2")
    _, first, _ = run(capsys, *args)
    (entry,) = cache_dir.glob("*.json")
    entry.write_text("{not json")
    with caplog.at_level("WARNING"):
        _, second, _ = run(capsys, *args)
    assert first == second and "corrupt" in caplog.text
    assert json.loads(entry.read_text())["verdict"] == "4"


def test_json_and_markdown_agree(capsys):
    _, js, _ = run(capsys, "endoprimal", "--algebra", "lat-2", "--k", "3")
    _, md, _ = run(capsys, "endoprimal", "--algebra", "lat-2", "--k", "3", "--format", "markdown")
    rep = json.loads(js)
    assert f"verdict: **{rep['verdict']}**" in md
    assert json.dumps(rep["witness"], sort_keys=True) in md


def test_verify_witness_round_trip(capsys, tmp_path):
    out = tmp_path / "r.json"
    run(capsys, "injectivity-sweep", "--ego", "three-T-h", "--power-bound", "2", "--size-bound", "9",
        "-o", str(out))
    code, text, _ = run(capsys, "verify-witness", str(out))
    assert code == 0 and "verified" in text
    rep = json.loads(out.read_text())
    rep["witness"]["phi"] = [rep["witness"]["phi"][0]] * len(rep["witness"]["phi"])
    out.write_text(json.dumps(rep))
    code, text, _ = run(capsys, "verify-witness", str(out))
    assert code == 1 and "REJECTED" in text


def test_entails_inline(capsys):
    code, out, _ = run(capsys, "entails", "--ego", "priestley-2", "--tuples", "0,0 0,1 1,1")
    assert code == 0 and json.loads(out)["verdict"] == "holds"


def test_check_plan_file(capsys, tmp_path):
    f = tmp_path / "plan.dw"
    f.write_text("""
    rel le/2 on dl-2 = {(0,0) (0,1) (1,1)}
    rel neq/2 on dl-2 = {(0,1) (1,0)}
    check smoke {
      duality algebra=dl-2 ego=three-T ;
      entails ego=priestley-2 rel=le ;
      clone-entails rels=neq rel=le expect=fails ;
    }
    """)
    code, out, _ = run(capsys, "check", str(f), "smoke")
    rep = json.loads(out)
    assert code == 0, rep
    assert [r["verdict"] for r in rep["results"]] == ["iso", "holds", "fails"]


def test_jobs_do_not_change_bytes(capsys):
    base = ("manifest", "--filter", "free/", "--no-cache")
    _, one, _ = run(capsys, *base)
    _, two, _ = run(capsys, *base, "--jobs", "2")
    assert one == two


def test_report_rerender(capsys, tmp_path):
    out = tmp_path / "r.json"
    run(capsys, "free-algebra", "--algebra", "lat-2", "--k", "3", "-o", str(out))
    code, md, _ = run(capsys, "report", str(out), "--format", "markdown")
    assert code == 0 and "verdict: **18**" in md
