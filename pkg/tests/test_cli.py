import json
import subprocess
import sys

import pytest

from assgp.cli import main
from assgp.systems import closure_seed, cyclic_enrich, system_bundle
from assgp.words import Word

SMALL = ["--max-word-len", "2", "--generators", "2", "--max-depth", "1", "--samples", "30"]


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out.strip(), out.err.strip()


def test_word_commands(capsys):
    assert run(capsys, "word", "mul", "x0 x1", "x1^-1 x0")[:2] == (0, "x0 x0")
    assert run(capsys, "word", "reduce", "x0 x0^-1")[:2] == (0, "e")
    assert run(capsys, "word", "lett", "x0 x1^-1 x0")[:2] == (0, "x0 x1")
    assert run(capsys, "word", "inv", "x0 x1^-1")[:2] == (0, "x1 x0^-1")
    assert run(capsys, "word", "cyclic-member", "x0 x1 x1 x0^-1", "x0 x1 x0^-1")[:2] == (0, "2")
    assert run(capsys, "word", "cyclic-member", "x0", "x1")[:2] == (0, "absent")


def test_word_json_io(capsys):
    code, out, _ = run(capsys, "word", "mul", '{"letters": [1, 2]}', "[-2, 1]", "--json")
    assert code == 0 and json.loads(out) == {"letters": [1, 1]}


def test_word_parse_error(capsys):
    code, _, err = run(capsys, "word", "reduce", "x0 ?? x1")
    assert code == 1 and "position 3" in err


def test_chain_roundtrip(tmp_path, capsys):
    out = tmp_path / "run"
    code, text, _ = run(capsys, "chain", "build", "--out", str(out), *SMALL)
    assert code == 0, text
    for name in ("manifest.json", "schedule.json", "stages/index.json", "certificates/log.json",
                 "certificates/witnesses.json", "reports/build.json", "reports/suites.json"):
        assert (out / name).exists()

    code, text, _ = run(capsys, "chain", "separate", "x0 x1", "--run", str(out))
    assert code == 0 and "replayed" in text
    code, _, err = run(capsys, "chain", "separate", "e", "--run", str(out))
    assert code == 1 and "identity" in err
    code, _, _ = run(capsys, "chain", "separate", "x0 x1 x0", "--run", str(out))
    assert code == 2

    code, text, _ = run(capsys, "chain", "certify-assgp", "x1", "1", "--run", str(out), "--json")
    assert code == 0
    payload = json.loads(text)
    assert payload["g"] == [2] and payload["spot_checked_powers"] > 0
    code, _, _ = run(capsys, "chain", "certify-assgp", "x1", "3", "--run", str(out))
    assert code == 2

    code, text, _ = run(capsys, "chain", "report", "--run", str(out))
    assert code == 0 and "verified" in text


def test_chain_build_from_schedule_file(tmp_path, capsys):
    sched = {"seed_letters": 1, "tasks": [{"type": "depth", "n": 1}, {"type": "separate", "g": "x0"},
                                          {"type": "assgp", "g": "x0^2", "n": 1}]}
    f = tmp_path / "s.json"
    f.write_text(json.dumps(sched))
    code, text, _ = run(capsys, "chain", "build", "--schedule", str(f), "--out", str(tmp_path / "r"),
                        "--samples", "30", "--json")
    assert code == 0
    assert json.loads(text)["ok"] is True
    suites = json.loads((tmp_path / "r" / "reports" / "suites.json").read_text())
    checked = {e["tag"]: e["checked"] for e in suites["entries"]}
    assert checked["separation witnesses replay"] == 1
    assert checked["ASSGP certificates fold and certify"] == 1


def test_chain_build_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "chain", "build", "--out", str(a), *SMALL)[0] == 0
    assert run(capsys, "chain", "build", "--out", str(b), *SMALL)[0] == 0
    files = sorted(p.relative_to(a) for p in a.rglob("*.json") if p.name != "timings.json")
    assert files == sorted(p.relative_to(b) for p in b.rglob("*.json") if p.name != "timings.json")
    for rel in files:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


def test_verify_lemmas(capsys):
    code, text, _ = run(capsys, "verify", "lemmas", "--samples", "60", "--json")
    assert code == 0 and json.loads(text)["ok"] is True


def test_verify_system(tmp_path, capsys):
    s = cyclic_enrich(closure_seed({0}, 1, [Word((1,))]), [Word((2,))])
    f = tmp_path / "sys.json"
    f.write_text(json.dumps({"systems": system_bundle(s)}))
    code, text, _ = run(capsys, "verify", "system", str(f), "--json")
    assert code == 0 and json.loads(text)["ok"] is True


def test_verify_corrupted_system(tmp_path, capsys):
    s = cyclic_enrich(closure_seed({0}, 1, [Word((1,))]), [Word((2,))])
    bundle = system_bundle(s)
    bundle[-1]["levels"][0]["recursive"] = False
    f = tmp_path / "bad.json"
    f.write_text(json.dumps({"systems": bundle}))
    code, text, _ = run(capsys, "verify", "system", str(f), "--json")
    report = json.loads(text)
    assert code == 1 and report["ok"] is False
    assert report["entries"][0]["tag"] == "validation"
    (tmp_path / "junk.json").write_text("{not json")
    assert run(capsys, "verify", "system", str(tmp_path / "junk.json"))[0] == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "assgp.cli", "word", "reduce", "x0 x0^-1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "e"


def test_missing_run_directory(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["chain", "report", "--run", str(tmp_path / "nope")])
    assert info.value.code == 1
