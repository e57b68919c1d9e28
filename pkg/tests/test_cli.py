import json
import math

import pytest
from hypothesis import given, strategies as st

from onewaypos.cli import main
from onewaypos.corpus import write_bundled_corpus
from onewaypos.report import CSV_COLUMNS, OUTCOME_CODES, RECORD_VERSION, ReportRecord


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    write_bundled_corpus(root)
    return root


def _records(text):
    return [ReportRecord.from_json(l) for l in text.splitlines()]


def test_honest_corpus_all_accepted(corpus, capsys):
    files = sorted(str(p) for p in (corpus / "honest").glob("*.yaml"))
    assert len(files) == 10
    assert main(["run", *files]) == 0
    recs = _records(capsys.readouterr().out)
    assert [r.outcome for r in recs] == ["Accepted"] * 10
    assert [r.scenario for r in recs] == [p.rsplit("/", 1)[1][:-5] for p in files]


def test_replay_corpus_rejected(corpus, capsys):
    assert main(["run", str(corpus / "stale-replay.yaml")]) == 0
    (r,) = _records(capsys.readouterr().out)
    assert r.outcome in ("NotContained", "ErrorRangeExceeded")
    assert r.attacks[0]["kind"] == "replay"


def test_corrupt_file_exit_2_no_partial_record(corpus, tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("meta: [this is not\n")
    good = str(corpus / "honest-2d.yaml")
    assert main(["run", good, str(bad)]) == 2
    captured = capsys.readouterr()
    recs = _records(captured.out)
    assert [r.scenario for r in recs] == ["honest-2d"]
    assert "bad.yaml" in captured.err


def test_io_failure_exit_3(corpus, tmp_path):
    out = tmp_path / "missing-dir" / "out.jsonl"
    assert main(["run", str(corpus / "honest-2d.yaml"), "--out", str(out)]) == 3


def test_byte_stable_and_parallel_order(corpus, tmp_path):
    files = sorted(str(p) for p in corpus.rglob("*.yaml"))
    a, b, c = tmp_path / "a.jsonl", tmp_path / "b.jsonl", tmp_path / "c.jsonl"
    assert main(["run", *files, "--out", str(a)]) == 0
    assert main(["run", *files, "--out", str(b)]) == 0
    assert main(["run", *files, "--out", str(c), "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_seed_override_recorded(corpus, capsys):
    main(["run", str(corpus / "honest-2d.yaml"), "--seed", "4242"])
    assert _records(capsys.readouterr().out)[0].seed == 4242


def test_csv_output(corpus, capsys):
    main(["run", str(corpus / "honest-2d.yaml"), str(corpus / "forced-delay.yaml"), "--format", "csv"])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert len(lines) == 3


def test_validate_and_report(corpus, tmp_path, capsys):
    assert main(["validate", str(corpus / "forgery.yaml")]) == 0
    out = tmp_path / "r.jsonl"
    main(["run", *sorted(str(p) for p in corpus.rglob("*.yaml")), "--out", str(out)])
    capsys.readouterr()
    assert main(["report", str(out), "--summary"]) == 0
    text = capsys.readouterr().out
    assert "records: 20" in text and "physics violations: 0" in text


def test_timing_flag(corpus, capsys):
    main(["run", str(corpus / "honest-2d.yaml"), "--timing"])
    assert _records(capsys.readouterr().out)[0].runtime_s >= 0


def test_compare_record(corpus, capsys):
    main(["run", str(corpus / "stolen-nonce-compare.yaml")])
    (r,) = _records(capsys.readouterr().out)
    assert r.protocol == "compare" and r.bidir_outcome == "BidirAccepted" and r.bidir_shortened
    assert r.outcome != "Accepted"


finite = st.floats(allow_nan=False, allow_infinity=False)


@given(st.sampled_from(sorted(OUTCOME_CODES)), st.text(max_size=20), st.integers(0, 2**64 - 1),
       st.one_of(st.none(), st.lists(finite, min_size=2, max_size=3)), st.one_of(st.none(), finite))
def test_record_round_trip(outcome, name, seed, pos, err):
    r = ReportRecord(RECORD_VERSION, name, seed, "unidirectional", outcome, "rejected", pos, err,
                     {"clock": "pass"}, [{"kind": "delay"}], 0)
    assert ReportRecord.from_json(r.to_json()) == r


def test_record_rejects_unknown_code():
    with pytest.raises(ValueError):
        ReportRecord(RECORD_VERSION, "x", 0, "unidirectional", "Maybe", "x", None, None, {}, [], 0)


def test_infinite_error_range_serialised_as_null(corpus, capsys):
    main(["run", str(corpus / "stale-replay.yaml")])
    line = capsys.readouterr().out
    data = json.loads(line)
    assert data["error_range_m"] is None or math.isfinite(data["error_range_m"])
