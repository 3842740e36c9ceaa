import json
import os

import pytest

import p2f

FIXTURES = os.environ.get("P2F_REPO_FIXTURES", os.path.join(os.path.dirname(__file__), "..", "..", "fixtures"))


def test_similarity_oracles():
    assert p2f.similarity("a b c", "b c d") == pytest.approx(0.5, abs=1e-9)
    assert p2f.similarity("a a b", "a b b", kind="cosine") == pytest.approx(0.8, abs=1e-9)
    with pytest.raises(ValueError):
        p2f.similarity("a", "b", kind="euclid")


def test_forgetfulness_and_selection():
    assert p2f.forgetfulness(["Skyward Solutions", "patent dispute"],
                             ["Nimbus Analytics", "patent dispute"]) == pytest.approx(0.5)
    assert p2f.semantic_distinction_ratio("cloud storage algorithms", "cloud encryption methods") == pytest.approx(2 / 3)
    assert p2f.select_best_candidate("Skyward Solutions", ["Skyward Solutions", "Nimbus Analytics"]) == 1
    assert p2f.prf1(["a"], ["a", "b"]) == pytest.approx((1.0, 0.5, 2 / 3))


def test_tokenize_pairs_classes():
    tokens = p2f.tokenize("Skyward Solutions sued us")
    assert [t for t, _ in tokens] == ["Skyward", "Solutions", "sued", "us"]
    assert p2f.normalized_tokens("Hello, World!") == ["hello", "world"]


def test_ratio_sweep_matches_closed_form():
    cells = p2f.ratio_sweep([3], [0], leak_rate=1.0, trials=4000, seed=1)
    assert len(cells) == 1
    assert cells[0]["exact"] == pytest.approx(p2f.expected_exact_forgetfulness(3, 1.0), abs=0.03)
    assert p2f.expected_genuine_recall(3, 0.5) == pytest.approx(0.125)


def test_scaffold_round_trips_through_parser():
    text = p2f.scaffold(2, seed=4)
    records = p2f.parse_corpus(text)
    assert len(records) == 14
    assert len({r["id"] for r in records}) == 14
    with pytest.raises(ValueError):
        p2f.parse_corpus("{not json")


def test_run_cli_pipeline(tmp_path):
    code, out, err = p2f.run_cli(["pipeline", "--mock", os.path.join(FIXTURES, "legal.mock"),
                                  "--corpus", os.path.join(FIXTURES, "demo.jsonl"), "-o", str(tmp_path)])
    assert code == 0, err
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "pipeline"
    assert (tmp_path / "report.csv").exists()
    code, _, _ = p2f.run_cli(["nope"])
    assert code == 1
