import io
import os
import subprocess
import sys

import pytest

from conftest import CORPUS
from kbforge.cli import EXIT_INPUT, EXIT_OK, EXIT_UNSAT, EXIT_USAGE, Options, Session, repl, run
from kbforge.groundtheory import parse_dimacs


def corpus(name):
    return os.path.join(CORPUS, name)


def call(*argv, session=None):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), session, out, err)
    return code, out.getvalue(), err.getvalue()


def test_model_expansion_prints_one_block():
    code, out, _ = call("mx", corpus("schedule_toy.idp"), "--theory", "T", "--structure", "db", "--vout", "Vout")
    assert code == EXIT_OK
    assert out.count("=== model") == 1 and "structure db over Vout" in out


def test_unsat_exit_status():
    code, out, _ = call("mx", corpus("pigeonhole.idp"), "--theory", "fit", "--structure", "four")
    assert code == EXIT_UNSAT and out.strip() == "unsat"


def test_usage_errors():
    assert call()[0] == EXIT_USAGE
    assert call("mx", corpus("pigeonhole.idp"), "--theory", "fit")[0] == EXIT_USAGE
    assert call("frobnicate")[0] == EXIT_USAGE
    assert call("--help")[0] == EXIT_OK


def test_input_errors(tmp_path):
    bad = tmp_path / "cyclic.idp"
    bad.write_text("vocabulary V is { type a subtype of b; type b subtype of a; };")
    code, _, err = call("check", str(bad))
    assert code == EXIT_INPUT and "a -> b -> a" in err
    code, _, err = call("check", str(tmp_path / "missing.idp"))
    assert code == EXIT_INPUT and "error" in err
    code, _, err = call("mx", corpus("pigeonhole.idp"), "--theory", "nope", "--structure", "four")
    assert code == EXIT_INPUT


def test_check_reports_clean_corpus():
    code, out, _ = call("check", corpus("data1.idp"))
    assert code == EXIT_OK


def test_ground_writes_dimacs(tmp_path):
    path = tmp_path / "ph.cnf"
    code, out, _ = call("ground", corpus("pigeonhole.idp"), "--theory", "fit", "--structure", "three",
                        "--no-symmetry", "--cnf", str(path))
    assert code == EXIT_OK and "wrote" in out
    nvars, clauses = parse_dimacs(path.read_text())
    assert nvars >= 9 and clauses
    code, out, _ = call("ground", corpus("pigeonhole.idp"), "--theory", "fit", "--structure", "three")
    assert code == EXIT_OK and out.strip()


def test_seed_makes_output_repeatable():
    argv = ("mx", corpus("coloring.idp"), "--theory", "proper", "--structure", "triangle",
            "--no-symmetry", "-n", "3", "--seed", "11")
    assert call(*argv)[1] == call(*argv)[1]


def test_printed_models_are_models(tmp_path):
    code, out, _ = call("mx", corpus("coloring.idp"), "--theory", "proper", "--structure", "triangle",
                        "-n", "0", "--orbits")
    assert code == EXIT_OK
    blocks = [b.split("\n", 1)[1] for b in out.split("=== model")[1:]]
    assert len(blocks) == 6
    head = open(corpus("coloring.idp"), encoding="utf-8").read().split("structure triangle")[0]
    for i, block in enumerate(blocks):
        path = tmp_path / f"m{i}.idp"
        path.write_text(head + block)
        code, verdict, _ = call("modelcheck", str(path), "--theory", "proper", "--structure", "triangle")
        assert code == EXIT_OK and verdict.strip() == "model"


def test_optimization_output():
    code, out, _ = call("opt", corpus("objective.idp"), "--theory", "choose", "--structure", "stock",
                        "--term", "spent")
    assert code == EXIT_OK
    assert "// value: 5" in out and "// optimal: yes" in out


def test_query_and_wfm():
    code, out, _ = call("query", corpus("data1.idp"), "--set", "{x : takes_ct(1,x)}", "--structure", "data1")
    assert code == EXIT_OK and out.strip() == "{Logic}"
    code, out, _ = call("wfm", corpus("closure.idp"), "--definition", "closure", "--structure", "chain")
    assert code == EXIT_OK and "path" in out


def test_normalize_and_propagate():
    code, out, _ = call("normalize", corpus("coloring.idp"), "--theory", "proper", "--pass", "push-negations")
    assert code == EXIT_OK and "theory proper over G" in out
    code, out, _ = call("propagate", corpus("coloring.idp"), "--theory", "proper", "--structure", "triangle")
    assert code == EXIT_OK and "structure" in out


def test_shell_script():
    script = "\n".join([
        f":load {corpus('coloring.idp')}",
        "mx --theory proper --structure triangle",
        ":set nbmodels=3",
        ":set symmetry=off",
        "mx --theory proper --structure triangle",
        ":frobnicate",
        ":set colour=blue",
        "mx --theory missing --structure triangle",
        ":list",
        ":quit",
        "mx --theory proper --structure triangle",
    ])
    session = Session()
    out, err = io.StringIO(), io.StringIO()
    assert repl(session, io.StringIO(script), out, err) == EXIT_OK
    text = out.getvalue()
    assert text.count("=== model 1") == 2 and text.count("=== model") == 4
    assert session.options == Options(nbmodels=3, symmetry=False)
    assert err.getvalue().count("error") == 3
    assert "theory proper" in text


def test_console_entry_point_without_color():
    env = dict(os.environ, NO_COLOR="1")
    proc = subprocess.run([sys.executable, "-m", "kbforge.cli", "check", "/nonexistent.idp"],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == EXIT_INPUT
    assert "\033[" not in proc.stderr and "error" in proc.stderr


@pytest.mark.skipif(not hasattr(os, "openpty"), reason="needs a pseudo-terminal")
def test_interactive_shell_on_a_terminal():
    import pty
    import select

    pid, fd = pty.fork()
    if pid == 0:
        os.execvpe(sys.executable, [sys.executable, "-m", "kbforge.cli", "repl", corpus("coloring.idp")],
                   dict(os.environ, NO_COLOR="1"))
    os.write(fd, b"mx --theory proper --structure triangle\n:quit\n")
    data = b""
    while True:
        ready, _, _ = select.select([fd], [], [], 20)
        if not ready:
            break
        try:
            chunk = os.read(fd, 4096)
        except OSError:
            break
        if not chunk:
            break
        data += chunk
    _, status = os.waitpid(pid, 0)
    assert os.waitstatus_to_exitcode(status) == EXIT_OK
    assert b"kbforge> " in data and b"=== model 1" in data


def test_require_resolves_relative_paths_once(tmp_path):
    lib = tmp_path / "lib"
    lib.mkdir()
    (lib / "graph.idp").write_text('require "../main.idp";\n'
                                   "vocabulary G is { type node; pred edge[node,node]; };\n")
    (tmp_path / "main.idp").write_text('require "lib/graph.idp";\n'
                                       "theory loopless over G is { !x: ~edge(x,x); };\n"
                                       "structure S over G is { node = {1; 2}; edge = {1,2}; };\n")
    code, out, err = call("mx", str(tmp_path / "main.idp"), "--theory", "loopless", "--structure", "S")
    assert code == EXIT_OK, err
    assert out.count("=== model") == 1
