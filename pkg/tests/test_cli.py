import io
import json
import subprocess
import sys

import jsonschema
import pytest

from pisem.cli import PROMPT, Session, main, repl, run_command

from conftest import CORPUS, MUTEX, ROOT, TESTS

GOLDEN = TESTS / "golden"
CHOICE = TESTS / "corpus" / "choice.imp"
SCHEMA = json.loads((ROOT / "docs" / "output_schema.json").read_text())
SAFETY = "[] ~(p1 == crit /\\ p2 == crit)"
LIVENESS = "[](p1 == try -> <> p1 == crit)"


def pic(*args, stdin=None):
    return subprocess.run([sys.executable, "-m", "pisem.cli", *map(str, args)],
                          input=stdin, capture_output=True, text=True, cwd=ROOT, timeout=60)


def test_load_message():
    s = Session()
    r = run_command(s, f"load {MUTEX}")
    assert r.text == "Module mutex loaded.\n" and s.module is not None


def test_failed_load_clears_module(tmp_path):
    s = Session()
    run_command(s, f"load {MUTEX}")
    bad = tmp_path / "bad.imp"
    bad.write_text("module m init nop")
    r = run_command(s, f"load {bad}")
    assert r.status == "error" and r.code == 2 and s.module is None
    assert r.diag == f"{bad}:1:18: parse error: expected ';', 'end', '|'; found end of input"


def test_needs_module():
    r = run_command(Session(), "exec")
    assert r.code == 2 and r.diag == "no module loaded"


def test_session_survives_errors():
    s = Session()
    run_command(s, f"load {MUTEX}")
    assert run_command(s, "mc [] (").code == 2
    assert run_command(s, "frobnicate").code == 2
    assert run_command(s, "set max-states x").code == 2
    assert run_command(s, f"mc {SAFETY}").text == "holds\n"


def test_exec_output():
    s = Session()
    run_command(s, f"load {TESTS / 'corpus' / 'procargs.imp'}")
    r = run_command(s, "exec")
    assert r.text == "r = 10\noutput: [5, 10]\nstatus: ok\n" and r.code == 0


def test_trace_requires_exec():
    s = Session()
    run_command(s, f"load {CHOICE}")
    assert run_command(s, "trace").code == 2
    run_command(s, "exec")
    assert run_command(s, "trace").text.startswith("C0:\n  cnt: [choice(")


def test_exec_seed_and_granularity():
    s = Session()
    run_command(s, f"load {CHOICE}")
    outs = {run_command(s, f"exec --seed {i}").text for i in range(10)}
    assert outs == {"x = 1\noutput: []\nstatus: ok\n", "x = 2\noutput: []\nstatus: ok\n"}
    run_command(s, "set granularity full")
    r = run_command(s, "exec")
    assert r.data["steps"] > 1


def test_runtime_error_diag():
    s = Session()
    run_command(s, f"load {TESTS / 'corpus' / 'divzero.imp'}")
    r = run_command(s, "exec")
    assert r.code == 3 and r.status == "aborted"
    assert r.diag == "runtime error: division by zero at #DIV"


def test_mc_verdicts(mutex):
    s = Session()
    run_command(s, f"load {MUTEX}")
    assert run_command(s, f"mc {SAFETY}").code == 0
    r = run_command(s, f"mc {LIVENESS}")
    assert r.code == 1 and r.text.startswith("violated\nstem:\n")
    assert "cycle:\n" in r.text


def test_dump_golden():
    s = Session()
    run_command(s, f"load {CHOICE}")
    assert run_command(s, "dump-kripke").text == (GOLDEN / "choice_kripke.txt").read_text()


def test_batch_golden():
    p = pic(CHOICE.relative_to(ROOT), "--exec", "--trace", "--dump-kripke",
            "--mc", "<> x == 2", "--mc", "[] ~(x == 1 /\\ x == 2)")
    assert p.stdout == (GOLDEN / "choice_session.txt").read_text()
    assert p.returncode == 1


def test_repl_equals_batch():
    cmds = [f"load {CHOICE.relative_to(ROOT)}", "exec", "trace", "dump-kripke",
            "mc <> x == 2", "mc [] ~(x == 1 /\\ x == 2)"]
    r = pic(stdin="\n".join(cmds) + "\n")
    assert r.stdout == (GOLDEN / "choice_session.txt").read_text()
    assert PROMPT not in r.stdout


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.stem)
def test_repl_equals_batch_corpus(path, capsys):
    flags = ["--exec", "--dump-kripke", "--mc", "tt"]
    assert main([str(path), *flags]) in (0, 3)
    batch = capsys.readouterr().out
    out = io.StringIO()
    lines = f"load {path}\nexec\ndump-kripke\nmc tt\n"
    repl(Session(), stdin=io.StringIO(lines), out=out, err=io.StringIO())
    assert out.getvalue() == batch


def test_exit_codes():
    assert pic(MUTEX, "--mc", SAFETY).returncode == 0
    p = pic(MUTEX, "--mc", LIVENESS)
    assert p.returncode == 1 and "stem:" in p.stdout
    p = pic("missing.imp", "--exec")
    assert p.returncode == 2 and "cannot open" in p.stderr and p.stdout == ""
    assert pic(TESTS / "golden" / "errors" / "bad_char.imp").returncode == 2
    assert pic(TESTS / "corpus" / "abort.imp").returncode == 3


def test_unknown_flag():
    p = pic(MUTEX, "--bogus")
    assert p.returncode == 2 and "usage:" in p.stderr


def test_diagnostics_on_stderr():
    p = pic(TESTS / "corpus" / "divzero.imp")
    assert "runtime error" in p.stderr and "runtime error" not in p.stdout


def test_json_schema():
    validator = jsonschema.Draft202012Validator(SCHEMA)
    runs = [
        (MUTEX, "--exec", "--trace", "--dump-kripke", "--mc", SAFETY, "--mc", LIVENESS),
        (TESTS / "corpus" / "divzero.imp", "--exec", "--mc", "[] x == 0"),
        (MUTEX, "--mc", "[] (", "--mc", "zz == 1"),
        ("missing.imp",),
        (TESTS / "golden" / "errors" / "undeclared.imp",),
    ]
    seen = set()
    for args in runs:
        p = pic(*args, "--format", "json")
        for line in p.stdout.splitlines():
            rec = json.loads(line)
            validator.validate(rec)
            seen.add((rec["command"], rec["status"]))
    s = Session()
    for line in [f"load {MUTEX}", "set max-states 50", "quit"]:
        validator.validate(json.loads(run_command(s, line).as_json()))
    assert {("mc", "holds"), ("mc", "violated"), ("exec", "aborted"),
            ("load", "error"), ("mc", "error"), ("trace", "ok")} <= seen


def test_json_counterexample_matches_text():
    p = pic(MUTEX, "--format", "json", "--mc", LIVENESS)
    rec = json.loads(p.stdout.splitlines()[-1])
    cx = rec["data"]["counterexample"]
    t = pic(MUTEX, "--mc", LIVENESS).stdout
    ids = [f"S{e['state']}" for e in cx["stem"] + cx["cycle"]]
    assert [ln.split()[0] for ln in t.splitlines() if ln.startswith("S")] == ids


def test_action_flags_need_file():
    p = pic("--exec")
    assert p.returncode == 2
