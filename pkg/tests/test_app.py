import json

import pytest

from app import build_parser, config_from_args, main
from main_logic.config import CACHE_DB_NAME, CACHE_DIR_ENV


@pytest.fixture(autouse=True)
def no_env_cache(monkeypatch):
    monkeypatch.delenv(CACHE_DIR_ENV, raising=False)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_kh_braid_json(capsys):
    code, out, _ = run(capsys, "kh", "--braid", "1 1", "--strands", "2")
    assert code == 0
    payload = json.loads(out)
    assert payload["invariant"] == "kh"
    assert {(row["i"], row["j"]) for row in payload["dims"]} == {(0, 0), (0, 2), (2, 4), (2, 6)}
    assert all(row["k"] is None for row in payload["dims"])


def test_kh_pd_text_with_dump(capsys):
    code, out, _ = run(capsys, "kh", "--pd", "X(1,1,2,2)", "--output", "text", "--dump-complex")
    assert code == 0
    assert out.startswith("KH  crossings=1  components=1  total=2")
    assert "# complex annular=False crossings=1" in out


def test_kh_malformed_pd_exits_2(capsys):
    code, out, err = run(capsys, "kh", "--pd", "X(1,3,2,4)")
    assert code == 2
    assert json.loads(out)["error"] == "DiagramParseError"
    assert err


def test_kh_requires_one_input(capsys):
    code, _, _ = run(capsys, "kh", "--pd", "O(1)", "--braid", "1", "--strands", "2")
    assert code == 2


def test_kh_crossing_limit_exits_3(capsys):
    code, out, _ = run(capsys, "kh", "--braid", "1 1 1", "--strands", "2", "--crossing-limit", "2")
    assert code == 3
    assert "crossing_limit=2" in json.loads(out)["message"]


def test_akh_negative_word_needs_equals_form(capsys):
    code, out, _ = run(capsys, "akh", "--braid=-1 -1", "--strands", "2")
    assert code == 0
    payload = json.loads(out)
    assert payload["windings"] == [1, 1]
    assert {row["k"] for row in payload["dims"]} <= {-2, 0, 2}


def test_causal_events(capsys):
    code, out, _ = run(capsys, "causal", "--events", "0,0,0;0.5,0,1")
    assert code == 10
    payload = json.loads(out)
    assert payload["related"] is True
    assert payload["oracle"]["class"] == "timelike"
    code, out, _ = run(capsys, "causal", "--events", "0,0,0;3,0,1")
    assert code == 0
    assert json.loads(out)["related"] is False


def test_causal_null_pair_text(capsys):
    code, out, _ = run(capsys, "causal", "--events", "0,0,0;1,0,1", "--output", "text")
    assert code == 10
    assert "route=sky_intersection" in out
    assert "skies meet at θ=0.000000" in out


def test_causal_braid_hypothesis_error(capsys):
    code, out, err = run(capsys, "causal", "--braid", "1", "--strands", "2")
    assert code == 2
    payload = json.loads(out)
    assert payload["error"] == "HypothesisError"
    assert payload["violations"][0]["message"] == "1 component, expected 2"
    assert "1 component, expected 2" in err


def test_causal_braid_both_routes(capsys):
    code, out, _ = run(capsys, "causal", "--braid=1 -1", "--route", "both")
    assert code == 0
    payload = json.loads(out)
    assert payload["cross_check"]["route"] == "kh"
    assert payload["word"] == [1, -1]


def test_causal_batch(tmp_path, capsys):
    source = tmp_path / "pairs.txt"
    source.write_text("0,0,0;0.5,0,1\n0,0,0;3,0,1\n0,0,0;1,0,1\n", encoding="utf-8")
    code, out, _ = run(capsys, "causal", "--batch", str(source), "--workers", "2")
    assert code == 0
    payload = json.loads(out)
    assert [row["line"] for row in payload["results"]] == [1, 2, 3]
    assert [row["related"] for row in payload["results"]] == [True, False, True]
    assert all(row["agrees_with_oracle"] for row in payload["results"])


def test_causal_batch_with_bad_line_exits_2(tmp_path, capsys):
    source = tmp_path / "pairs.txt"
    source.write_text("0,0,0;3,0,1\nnot a pair\n", encoding="utf-8")
    code, out, _ = run(capsys, "causal", "--batch", str(source), "--output", "text")
    assert code == 2
    assert "line 2: skipped" in out
    assert "success=1  failed=1" in out


def test_causal_batch_missing_file(tmp_path, capsys):
    code, out, _ = run(capsys, "causal", "--batch", str(tmp_path / "none.txt"))
    assert code == 2
    assert "error" in json.loads(out)


def test_write_template(tmp_path, capsys):
    target = tmp_path / "pairs.txt"
    code, out, _ = run(capsys, "causal", f"--write-template={target}")
    assert code == 0
    assert json.loads(out) == {"template": str(target)}
    code, _, _ = run(capsys, "causal", "--batch", str(target))
    assert code == 0


def test_cache_dir_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(CACHE_DIR_ENV, str(tmp_path))
    code, _, _ = run(capsys, "akh", "--braid", "1 1", "--strands", "2")
    assert code == 0
    assert (tmp_path / CACHE_DB_NAME).exists()


def test_no_cache_flag(tmp_path, capsys):
    code, _, _ = run(capsys, "kh", "--braid", "1 1", "--strands", "2",
                     "--cache-dir", str(tmp_path), "--no-cache")
    assert code == 0
    assert not (tmp_path / CACHE_DB_NAME).exists()


def test_invalid_config_exits_2(capsys):
    code, out, _ = run(capsys, "causal", "--events", "0,0,0;3,0,1", "--epsilon", "0")
    assert code == 2
    assert json.loads(out)["error"] == "ConfigError"


def test_config_from_args_prefers_command_line(tmp_path, monkeypatch):
    monkeypatch.setenv(CACHE_DIR_ENV, "/from/env")
    args = build_parser().parse_args(["verify", "--cache-dir", str(tmp_path), "--seed", "7"])
    config = config_from_args(args)
    assert config.cache_dir == str(tmp_path)
    assert config.seed == 7
    args = build_parser().parse_args(["kh", "--pd", "O(1)"])
    assert config_from_args(args).cache_dir == "/from/env"


def test_verify_selected_suites(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "models", "--suite", "integrity",
                       "--max-crossings", "6")
    assert code == 0
    payload = json.loads(out)
    assert payload["passed"] is True
    assert [suite["suite"] for suite in payload["suites"]] == ["models", "integrity"]


@pytest.mark.parametrize("output", ["json", "text"])
def test_verify_output_is_repeatable(capsys, output):
    argv = ("verify", "--no-cache", "--suite", "models", "--suite", "invariance",
            "--words", "3", "--output", output)
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first[0] == second[0] == 0
    assert first[1] == second[1]
    if output == "json":
        assert all("seconds" not in suite for suite in json.loads(first[1])["suites"])
