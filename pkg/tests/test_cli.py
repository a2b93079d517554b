"""Campaign CLI: tables, cache semantics, verdicts, file interfaces, figures."""
import csv
import io
import json
from math import comb

import pytest

from ufam import __version__
from ufam.catalog import ParamQuad, prefix_family
from ufam.cli import (
    ResultCache,
    main,
    parse_range,
    verify_quad,
)
from ufam.core import read_family, write_family
from ufam.search import SearchBudget, exact_max_shifted


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_range_forms():
    assert parse_range("7") == [7]
    assert parse_range("3..6") == [3, 4, 5, 6]
    assert parse_range("2,5,9") == [2, 5, 9]


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

def test_bounds_crossover_sweep(capsys):
    code, out, _ = run_cli(["bounds", "--n", "8..14", "--k", "3", "--s", "3",
                            "--q", "7"], capsys)
    assert code == 0
    rows = csv_rows(out)
    exact = {int(r["n"]): int(r["value"]) for r in rows
             if r["provenance"] == "k3-q7-complete"}
    assert exact == {8: 35, 9: 35, 10: 40, 11: 46, 12: 55, 13: 66, 14: 78}
    assert len({r["n"] for r in rows}) == 7


def test_bounds_small_q_exact(capsys):
    code, out, _ = run_cli(["bounds", "--n", "20", "--k", "3", "--s", "4",
                            "--q", "5"], capsys)
    assert code == 0
    rows = csv_rows(out)
    smallq = [r for r in rows if r["provenance"] == "small-q-complete"]
    assert smallq and int(smallq[0]["value"]) == 10
    assert smallq[0]["kind"] == "exact"


def test_bounds_invalid_q_yields_error_row_and_continues(capsys):
    code, out, _ = run_cli(["bounds", "--n", "10", "--k", "3", "--s", "3",
                            "--q", "9,7"], capsys)
    assert code == 0
    rows = csv_rows(out)
    errors = [r for r in rows if r["provenance"] == "error"]
    good = [r for r in rows if r["q"] == "7" and r["provenance"] != "error"]
    assert len(errors) == 1 and errors[0]["q"] == "9"
    assert good


def test_bounds_csv_and_json_carry_identical_values(tmp_path, capsys):
    args = ["bounds", "--n", "8..12", "--k", "3", "--s", "3", "--q", "7"]
    _, out_csv, _ = run_cli(args + ["--format", "csv"], capsys)
    _, out_json, _ = run_cli(args + ["--format", "json"], capsys)
    from_csv = csv_rows(out_csv)
    from_json = json.loads(out_json)
    assert len(from_csv) == len(from_json)
    for rc, rj in zip(from_csv, from_json):
        for key in ("n", "k", "s", "q", "p", "r", "value", "kind", "provenance"):
            assert str(rj[key]) == rc[key]


def test_bounds_out_file_matches_stdout(tmp_path, capsys):
    out_path = tmp_path / "table.csv"
    _, out, _ = run_cli(["bounds", "--n", "9", "--k", "3", "--s", "3", "--q", "7",
                         "--out", str(out_path)], capsys)
    assert out_path.read_text() == out


def test_bounds_plot_renders_figure(tmp_path, capsys):
    out_path = tmp_path / "table.csv"
    code, _, err = run_cli(["bounds", "--n", "8..14", "--k", "3", "--s", "3",
                            "--q", "7", "--out", str(out_path), "--plot"], capsys)
    assert code == 0
    png = tmp_path / "table-k3-s3-q7.png"
    assert png.exists() and png.stat().st_size > 1000
    assert str(png) in err


# ---------------------------------------------------------------------------
# exact + cache
# ---------------------------------------------------------------------------

def test_exact_runs_and_then_serves_from_cache(tmp_path, capsys):
    cache = tmp_path / "cache.json"
    args = ["exact", "--n", "9", "--k", "3", "--s", "3", "--q", "7",
            "--cache", str(cache), "--witness-dir", str(tmp_path)]
    code, out, err = run_cli(args, capsys)
    assert code == 0
    row = csv_rows(out)[0]
    assert int(row["value"]) == 35
    assert row["status"] == "proved-optimal"
    assert int(row["nodes"]) > 0
    witness_path = tmp_path / "witness-n9-k3-s3-q7.family"
    assert witness_path.exists()
    witness = read_family(witness_path)
    assert len(witness) == 35

    code, out, _ = run_cli(args, capsys)
    assert code == 0
    row = csv_rows(out)[0]
    assert row["status"] == "cached"
    assert int(row["nodes"]) == 0
    assert int(row["value"]) == 35


def test_exact_rejects_multithreading(tmp_path, capsys):
    code, _, err = run_cli(["exact", "--n", "9", "--k", "3", "--s", "3",
                            "--q", "7", "--threads", "2",
                            "--cache", str(tmp_path / "c.json")], capsys)
    assert code == 2
    assert "threads" in err


def test_exact_target_early_stop(tmp_path, capsys):
    code, out, _ = run_cli(["exact", "--n", "8", "--k", "3", "--s", "3",
                            "--q", "7", "--target", "35",
                            "--cache", str(tmp_path / "c.json"),
                            "--witness-dir", str(tmp_path)], capsys)
    assert code == 0
    row = csv_rows(out)[0]
    assert row["status"] == "budget-exhausted"
    assert int(row["value"]) == 35
    assert row["kind"] == "lower"


def test_exact_checkpoint_resume_flags(tmp_path, capsys):
    cache1 = tmp_path / "c1.json"
    ck = tmp_path / "ck.json"
    code, out, _ = run_cli(["exact", "--n", "10", "--k", "3", "--s", "3",
                            "--q", "7", "--budget-nodes", "60",
                            "--checkpoint", str(ck),
                            "--cache", str(cache1),
                            "--witness-dir", str(tmp_path)], capsys)
    assert code == 0
    row = csv_rows(out)[0]
    assert row["status"] == "budget-exhausted"
    assert row["kind"] == "lower"  # cache stores a certified lower bound only
    assert ck.exists()

    code, out, _ = run_cli(["exact", "--n", "10", "--k", "3", "--s", "3",
                            "--q", "7", "--resume", str(ck),
                            "--cache", str(tmp_path / "c2.json"),
                            "--witness-dir", str(tmp_path)], capsys)
    assert code == 0
    row = csv_rows(out)[0]
    assert row["status"] == "proved-optimal"
    assert int(row["value"]) == 40


def test_cache_merge_is_idempotent(tmp_path, capsys):
    cache = tmp_path / "cache.json"
    args = ["verify", "--n", "8..9", "--k", "3", "--s", "3", "--q", "7",
            "--cache", str(cache), "--witness-dir", str(tmp_path)]
    run_cli(args, capsys)
    first = cache.read_text()
    run_cli(args, capsys)
    assert cache.read_text() == first


def test_cache_version_mismatch_warns(tmp_path, capsys):
    cache = tmp_path / "cache.json"
    payload = {"version": "0.0.0-test", "entries": {}}
    cache.write_text(json.dumps(payload))
    _, _, err = run_cli(["exact", "--n", "8", "--k", "3", "--s", "3", "--q", "7",
                         "--cache", str(cache), "--witness-dir", str(tmp_path)],
                        capsys)
    assert "version 0.0.0-test" in err
    assert json.loads(cache.read_text())["version"] == __version__


def test_cache_lock_excludes_second_owner(tmp_path):
    cache_path = tmp_path / "cache.json"
    with ResultCache(str(cache_path)):
        with pytest.raises(RuntimeError):
            with ResultCache(str(cache_path)):
                pass


def test_cache_never_degrades(tmp_path):
    quad = ParamQuad(9, 3, 3, 7)
    path = str(tmp_path / "cache.json")
    proved = exact_max_shifted(quad)
    partial = exact_max_shifted(quad, SearchBudget(max_nodes=10))
    with ResultCache(path) as cache:
        cache.merge_outcome(quad, proved)
    with ResultCache(path) as cache:
        cache.merge_outcome(quad, partial)  # weaker: ignored
        assert cache.exact_record(quad).value == proved.value
        assert cache.searches[quad.key()]["status"] == "proved-optimal"


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def test_verify_confirms_crossover_range(tmp_path, capsys):
    code, out, _ = run_cli(["verify", "--n", "8..10", "--k", "3", "--s", "3",
                            "--q", "7", "--cache", str(tmp_path / "c.json"),
                            "--witness-dir", str(tmp_path)], capsys)
    assert code == 0
    rows = csv_rows(out)
    assert [r["verdict"] for r in rows] == ["CONFIRMED"] * 3


def test_verify_open_on_tiny_budget(tmp_path, capsys):
    code, out, _ = run_cli(["verify", "--n", "10", "--k", "3", "--s", "3",
                            "--q", "7", "--budget-nodes", "10",
                            "--cache", str(tmp_path / "c.json"),
                            "--witness-dir", str(tmp_path)], capsys)
    assert code == 0
    assert csv_rows(out)[0]["verdict"] == "OPEN"


def test_verify_refutes_corrupted_conjecture():
    # harness self-test: against a deliberately lowered conjectured value the
    # searched maximum must refute, with a strictly larger witness attached
    quad = ParamQuad(9, 3, 3, 7)
    verdict, outcome, conj = verify_quad(quad, SearchBudget(), conjectured=34)
    assert verdict == "REFUTED"
    assert outcome.value == 35 > conj
    assert len(outcome.witness) == 35


def test_verify_cli_exit_nonzero_on_refutation(tmp_path, capsys, monkeypatch):
    import ufam.cli as cli_mod

    original = cli_mod.verify_quad

    def corrupted(quad, budget, cache=None, conjectured=None):
        return original(quad, budget, cache, conjectured=34)

    monkeypatch.setattr(cli_mod, "verify_quad", corrupted)
    code, out, err = run_cli(["verify", "--n", "9", "--k", "3", "--s", "3",
                              "--q", "7", "--cache", str(tmp_path / "c.json"),
                              "--witness-dir", str(tmp_path)], capsys)
    assert code == 1
    assert csv_rows(out)[0]["verdict"] == "REFUTED"
    refutation = tmp_path / "refutation-n9-k3-s3-q7.family"
    assert refutation.exists()
    assert len(read_family(refutation)) == 35


# ---------------------------------------------------------------------------
# oracle / ties
# ---------------------------------------------------------------------------

def test_oracle_command_matches(capsys):
    code, out, _ = run_cli(["oracle", "--n", "5..6", "--k", "2", "--s", "2..3",
                            "--q", "3..4"], capsys)
    assert code == 0
    rows = csv_rows(out)
    statuses = {r["status"] for r in rows if r["provenance"] != "error"}
    assert statuses == {"match"}


def test_oracle_command_flags_oversized_instances(capsys):
    code, out, _ = run_cli(["oracle", "--n", "9", "--k", "3", "--s", "3",
                            "--q", "7"], capsys)
    assert code == 0
    rows = csv_rows(out)
    assert rows[0]["provenance"] == "error"
    assert "brute-force cap" in rows[0]["citation"]


def test_oracle_inconclusive_under_tiny_budget(capsys):
    code, out, _ = run_cli(["oracle", "--n", "6", "--k", "2", "--s", "3",
                            "--q", "4", "--budget-nodes", "2"], capsys)
    assert code == 0  # not a mismatch, just unfinished
    assert csv_rows(out)[0]["status"] == "inconclusive"


def test_ties_budget_exhaustion_becomes_error_row(tmp_path, capsys):
    code, out, _ = run_cli(["ties", "--n", "10", "--k", "3", "--s", "3",
                            "--q", "7", "--budget-nodes", "10",
                            "--witness-dir", str(tmp_path)], capsys)
    assert code == 0
    row = csv_rows(out)[0]
    assert row["provenance"] == "error"
    assert "stopped early" in row["citation"]


def test_witness_dir_is_created(tmp_path, capsys):
    nested = tmp_path / "a" / "b"
    code, _, _ = run_cli(["exact", "--n", "8", "--k", "3", "--s", "3", "--q", "7",
                          "--cache", str(tmp_path / "c.json"),
                          "--witness-dir", str(nested)], capsys)
    assert code == 0
    assert (nested / "witness-n8-k3-s3-q7.family").exists()


def test_ties_command_writes_families(tmp_path, capsys):
    code, out, _ = run_cli(["ties", "--n", "9", "--k", "3", "--s", "3", "--q", "7",
                            "--witness-dir", str(tmp_path)], capsys)
    assert code == 0
    rows = csv_rows(out)
    assert len(rows) == 1
    assert rows[0]["status"] == "tie 1/1"
    fam_path = tmp_path / "maximum-n9-k3-s3-q7-1of1.family"
    assert read_family(fam_path) == prefix_family(7, 3, 9, 3)


# ---------------------------------------------------------------------------
# check-family
# ---------------------------------------------------------------------------

def test_check_family_on_construction(tmp_path, capsys):
    path = tmp_path / "f2.family"
    write_family(prefix_family(4, 2, 10, 3), path)
    code, out, _ = run_cli(["check-family", str(path), "--s", "3", "--q", "7"],
                           capsys)
    assert code == 0
    assert "size: 40" in out
    assert "union_bounded: True" in out
    assert "is_shifted: True" in out
    assert "in_candidate_universe: True" in out


def test_check_family_flags_violations(tmp_path, capsys):
    from ufam.core import complete_family

    path = tmp_path / "c83.family"
    write_family(complete_family(8, 3), path)
    code, out, _ = run_cli(["check-family", str(path), "--s", "3", "--q", "7",
                            "--format", "json"], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["union_bounded"] is False
    assert report["size"] == comb(8, 3)


def test_check_family_parse_error_carries_line(tmp_path, capsys):
    path = tmp_path / "bad.family"
    path.write_text("ground=7 k=2\n1,2\n1,2,2\n")
    code, _, err = run_cli(["check-family", str(path), "--s", "3", "--q", "4"],
                           capsys)
    assert code == 2
    assert "line 3" in err


# ---------------------------------------------------------------------------
# crossover
# ---------------------------------------------------------------------------

def test_crossover_command_table_and_plot(tmp_path, capsys):
    out_path = tmp_path / "cross.csv"
    code, out, err = run_cli(["crossover", "--s", "3", "--t", "1", "--n", "8..14",
                              "--out", str(out_path), "--plot"], capsys)
    assert code == 0
    rows = csv_rows(out)
    at12 = [r for r in rows if r["n"] == "12"][0]
    assert (at12["f1"], at12["f2"], at12["f3"]) == ("55", "52", "35")
    assert at12["maximal"] == "F1"
    assert all(r["formula_matches_construction"] == "True" for r in rows)
    png = tmp_path / "cross-s3-t1.png"
    assert png.exists() and png.stat().st_size > 1000
