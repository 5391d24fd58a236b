import json
from fractions import Fraction

import pytest

from horm.cli import main
from horm.streamio import read_transactions
from horm.taxonomy import parse_taxonomy

from conftest import CLOTHING, FIVE_TXNS, FLAT_ITEMS
from oracles import rescan_count


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def stats_of(out):
    (line,) = [ln for ln in out.splitlines() if ln.startswith("#stats\t")]
    return json.loads(line.split("\t", 1)[1])


def data_rows(out):
    return [ln for ln in out.splitlines() if not ln.startswith("#")]


@pytest.fixture
def generated(tmp_path, capsys):
    tax, txn = tmp_path / "tax.tsv", tmp_path / "txn.txt"
    code, _, _ = run(capsys, "generate", "--seed", 7, "-M", 4, "--depth", 3, "--transactions", 2000,
                     "--plant", "0.0:0.1:0.9", "--taxonomy-out", tax, "--output", txn)
    assert code == 0
    return tax, txn


def test_generate_is_deterministic(tmp_path, capsys, generated):
    tax, txn = generated
    tax2, txn2 = tmp_path / "t2.tsv", tmp_path / "x2.txt"
    run(capsys, "generate", "--seed", 7, "-M", 4, "--depth", 3, "--transactions", 2000,
        "--plant", "0.0:0.1:0.9", "--taxonomy-out", tax2, "--output", txn2)
    assert tax.read_bytes() == tax2.read_bytes()
    assert txn.read_bytes() == txn2.read_bytes()
    assert len(txn.read_text().splitlines()) == 2000


def test_planted_confidence_is_recovered(generated):
    tax, txn = generated
    tree = parse_taxonomy(tax.read_text())
    data = [t.items for t in read_transactions(txn.read_text().splitlines(), tree)]
    conf = Fraction(rescan_count(data, [(0, 0), (0, 1)]), rescan_count(data, [(0, 0)]))
    assert abs(conf - Fraction(9, 10)) <= Fraction(5, 100)


def test_generate_rejects_too_many_items(capsys):
    code, _, err = run(capsys, "generate", "-M", 2, "--depth", 2, "--items", 5)
    assert code == 2 and "do not fit" in err


def test_stream_algorithms_agree(capsys, generated):
    tax, txn = generated
    outs = {}
    for algo in ("horm", "mhorm"):
        code, out, _ = run(capsys, "mine-stream", "--taxonomy", tax, "--input", txn, "--sic", "0,0.1,1",
                           "--minsup", 0.05, "--minconf", 0.5, "--algo", algo, "--stats")
        assert code == 0
        outs[algo] = out
    assert data_rows(outs["horm"]) == data_rows(outs["mhorm"])
    assert stats_of(outs["mhorm"])["touches"]["mhorm"] <= stats_of(outs["horm"])["touches"]["horm"]
    assert any(r.startswith("rule\t0\t0.0\t0.1\t") for r in data_rows(outs["horm"]))


def test_stream_resume_matches_one_shot(tmp_path, capsys, generated):
    tax, txn = generated
    lines = txn.read_text().splitlines(keepends=True)
    head, tail = tmp_path / "head.txt", tmp_path / "tail.txt"
    head.write_text("".join(lines[:777]))
    tail.write_text("".join(lines[777:]))
    snap = tmp_path / "state.bin"
    args = ["--taxonomy", tax, "--minsup", 0.05, "--minconf", 0.4]
    _, full, _ = run(capsys, "mine-stream", "--input", txn, "--sic", "0,1,0.2", *args)
    code, _, _ = run(capsys, "mine-stream", "--input", head, "--sic", "0,1,0.2", "--snapshot-out", snap, *args)
    assert code == 0
    code, resumed, _ = run(capsys, "mine-stream", "--input", tail, "--resume", snap, *args)
    assert code == 0
    assert resumed == full
    code, offline, _ = run(capsys, "rules", "--taxonomy", tax, "--resume", snap, "--minsup", 0.05, "--minconf", 0.4)
    assert code == 0 and offline.startswith("# kind")


@pytest.mark.parametrize("minsup", ["1.1", "0", "abc"])
def test_bad_minsup_is_usage_error(capsys, generated, minsup):
    tax, txn = generated
    code, _, _ = run(capsys, "mine-stream", "--taxonomy", tax, "--input", txn, "--sic", "0", "--minsup", minsup)
    assert code == 2


def test_bad_data_is_data_error(tmp_path, capsys, generated):
    tax, _ = generated
    bad = tmp_path / "bad.txt"
    bad.write_text("0.0.0,9.9.9\n")
    code, _, err = run(capsys, "mine-stream", "--taxonomy", tax, "--input", bad, "--sic", "0")
    assert code == 1 and "line 1" in err
    code, _, _ = run(capsys, "mine-stream", "--taxonomy", tax, "--input", bad, "--sic", "0", "--lenient")
    assert code == 0


def test_broken_taxonomy_is_data_error(tmp_path, capsys):
    tax = tmp_path / "tax.tsv"
    tax.write_text("0\tA\n0.0.0\tdeep\n")
    code, _, err = run(capsys, "metrics", "--taxonomy", tax)
    assert code == 1 and "missing parent" in err


def test_missing_file_is_usage_error(tmp_path, capsys):
    code, _, _ = run(capsys, "metrics", "--taxonomy", tmp_path / "nope.tsv")
    assert code == 2


@pytest.fixture
def five_files(tmp_path):
    tax, txn = tmp_path / "items.tsv", tmp_path / "five.txt"
    tax.write_text(FLAT_ITEMS)
    txn.write_text("".join(",".join(str(i) for i in sorted(t)) + "\n" for t in FIVE_TXNS))
    return tax, txn


def test_mine_constrained_fixture(capsys, five_files):
    tax, txn = five_files
    tables = {}
    stats = {}
    for strategy in ("selected", "direct", "discard"):
        code, out, _ = run(capsys, "mine-constrained", "--taxonomy", tax, "--input", txn, "--constraint", "3",
                           "--minsup", 0.4, "--minconf", 0.6, "--strategy", strategy, "--stats")
        assert code == 0
        tables[strategy] = data_rows(out)
        stats[strategy] = stats_of(out)
    assert tables["selected"] == tables["direct"] == tables["discard"]
    rules = [r.split("\t")[2:4] for r in tables["selected"] if r.startswith("rule")]
    assert rules == [["1", "3"], ["2", "3"]]
    assert stats["selected"]["phase1_counted"] <= stats["discard"]["phase1_counted"]


def test_mine_constrained_bad_constraint(capsys, five_files):
    tax, txn = five_files
    code, _, err = run(capsys, "mine-constrained", "--taxonomy", tax, "--input", txn, "--constraint", "1 & & 2")
    assert code == 2 and "offset 4" in err


def test_bench_reports(capsys):
    code, out, _ = run(capsys, "bench", "--transactions", 600, "--mode", "stream")
    assert code == 0
    summary = json.loads(out.splitlines()[-1].split("\t", 1)[1])
    assert summary["stream"]["touch_ratio"] < 1
    code, out, _ = run(capsys, "bench", "--transactions", 300, "--mode", "stream", "--sic", "1")
    summary = json.loads(out.splitlines()[-1].split("\t", 1)[1])
    assert summary["stream"]["touch_ratio"] == 1.0


def test_bench_constrained_reports_selectivity(capsys):
    code, out, _ = run(capsys, "bench", "--mode", "constrained")
    assert code == 0
    summary = json.loads(out.splitlines()[-1].split("\t", 1)[1])
    rows = summary["constrained"]
    assert [r["target_selectivity"] for r in rows] == [0.1, 0.01]
    for r in rows:
        assert 0 < r["selectivity"] <= 1
        assert r["tables_equal"]


def test_metrics_clothing(tmp_path, capsys):
    tax = tmp_path / "c.tsv"
    tax.write_text(CLOTHING)
    code, out, _ = run(capsys, "metrics", "--taxonomy", tax)
    assert code == 0
    assert "max_dit=2" in out
    rows = data_rows(out)
    assert len(rows) == 7
    code, out, _ = run(capsys, "metrics", "--taxonomy", tax, "--warn-dit", 1)
    flagged = {r.split("\t")[0] for r in data_rows(out) if r.endswith("deep")}
    assert flagged == {"0.0", "0.0.0", "0.0.1", "1.0", "1.1"}


def test_metrics_empty(tmp_path, capsys):
    tax = tmp_path / "e.tsv"
    tax.write_text("# nothing\n")
    code, out, _ = run(capsys, "metrics", "--taxonomy", tax)
    assert code == 0 and data_rows(out) == []


@pytest.fixture
def event_files(tmp_path):
    tax = tmp_path / "c.tsv"
    tax.write_text(CLOTHING)
    ev = tmp_path / "ev.tsv"
    # every jacket purchase is followed by a shoe purchase two ticks later
    ev.write_text("".join(f"0.0.0\tjacket\t{t}\n1.0\tshoe\t{t + 2}\n" for t in range(0, 40, 10)))
    return tax, ev


def test_temporal_command(capsys, event_files):
    tax, ev = event_files
    code, out, _ = run(capsys, "temporal", "--taxonomy", tax, "--input", ev, "--class1", "Clothes",
                       "--class2", "Footwear", "--patterns", "before", "--min-support", 2)
    assert code == 0
    (row,) = data_rows(out)
    fields = row.split("\t")
    # jacket@t precedes shoe@s for s = t+2, t+12, ... : 4 + 3 + 2 + 1 pairs
    assert fields[:6] == ["0.0.0", "1.0", "jacket", "shoe", "before", "10"]


def test_temporal_min_support_above_join(capsys, event_files):
    tax, ev = event_files
    code, out, _ = run(capsys, "temporal", "--taxonomy", tax, "--input", ev, "--class1", "0",
                       "--class2", "1", "--min-support", 16)
    assert code == 0 and data_rows(out) == []


def test_temporal_unknown_class(capsys, event_files):
    tax, ev = event_files
    code, _, _ = run(capsys, "temporal", "--taxonomy", tax, "--input", ev, "--class1", "Hats", "--class2", "1")
    assert code == 2
