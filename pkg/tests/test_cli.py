import csv
import io
import json
import subprocess
import sys

import pytest

from unsplittable.cli import main
from unsplittable.core import parse_instance, parse_routing, verify_routing
from unsplittable.treedecomp import read_td, validate


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path):
    zero = tmp_path / "zero.json"
    zero.write_text('{"num_vertices": 3, "edges": [[0, 1, 1], [1, 2, 1]], "tasks": [], "target": 1}\n')
    k2 = tmp_path / "k2.json"
    k2.write_text('{"num_vertices": 2, "edges": [[0, 1, 5]], "tasks": [[0, 1, 3, 7]], "target": 7}\n')
    good = tmp_path / "good.json"
    good.write_text('{"routes": [{"task": 0, "path": [0, 1]}]}\n')
    return tmp_path


def test_solve_zero_tasks_says_no(capsys, files):
    code, out, _ = run(capsys, "solve", "--algo", "brute", "--instance", str(files / "zero.json"))
    assert out == "profit=0 decision=no\n"
    assert code == 1


def test_verify_valid_routing(capsys, files):
    code, out, _ = run(capsys, "verify", "--instance", str(files / "k2.json"), "--routing", str(files / "good.json"))
    assert code == 0
    assert out.startswith("valid=true profit=7")


def test_verify_reports_violation(capsys, files):
    bad = files / "bad.json"
    bad.write_text('{"routes": [{"task": 0, "path": [1, 0]}]}\n')
    code, out, _ = run(capsys, "verify", "--instance", str(files / "k2.json"), "--routing", str(bad), "--json")
    assert code == 2
    assert json.loads(out)["violations"][0]["kind"] == "endpoint_mismatch"


def test_solvers_agree_and_witness_verifies(capsys, tmp_path):
    inst_path = tmp_path / "r.json"
    assert run(capsys, "generate", "--out", str(inst_path), "random", "--n", "7", "--seed", "11")[0] == 0
    inst = parse_instance(inst_path.read_text())
    lines = set()
    for algo in ("brute", "xp", "fpt"):
        w = tmp_path / f"w_{algo}.json"
        code, out, err = run(capsys, "solve", "--algo", algo, "--instance", str(inst_path), "--witness", str(w))
        assert code in (0, 1)
        lines.add(out)
        if algo != "brute":
            assert "decomposition width" in err
        rep = verify_routing(inst, parse_routing(w.read_text()))
        assert rep.valid and f"profit={rep.profit} " in out
    assert len(lines) == 1


def test_max_len_override(capsys, tmp_path):
    p = tmp_path / "p.json"
    p.write_text('{"num_vertices": 3, "edges": [[0, 1, 1], [1, 2, 1]], "tasks": [[0, 2, 1, 4]], "target": 1}\n')
    assert run(capsys, "solve", "--algo", "fpt", "--instance", str(p))[1] == "profit=4 decision=yes\n"
    code, out, _ = run(capsys, "solve", "--algo", "fpt", "--instance", str(p), "--max-len", "1")
    assert (code, out) == (1, "profit=0 decision=no\n")


def test_solve_with_td_file(capsys, files):
    td = files / "k2.td"
    td.write_text("s td 1 2 2\nb 1 1 2\n")
    code, out, _ = run(capsys, "solve", "--algo", "xp", "--instance", str(files / "k2.json"), "--td", str(td), "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["profit"] == 7 and doc["decision"] == "yes"
    td.write_text("s td 2 1 2\nb 1 1\nb 2 2\n1 2\n")
    assert run(capsys, "solve", "--algo", "xp", "--instance", str(files / "k2.json"), "--td", str(td))[0] == 2


def test_decompose(capsys, files):
    code, out, _ = run(capsys, "decompose", "--instance", str(files / "zero.json"), "--nice")
    assert code == 0
    td = read_td(out)
    assert validate(parse_instance((files / "zero.json").read_text()).graph, td)[0]
    assert td.width == 1


def test_generate_mcc_and_binpack(capsys, tmp_path):
    (tmp_path / "c.txt").write_text("0\n1\n")
    (tmp_path / "e.txt").write_text("0 1\n")
    (tmp_path / "i.txt").write_text("2 3 4 1\n")
    code, out, _ = run(capsys, "generate", "mcc", "--colors", str(tmp_path / "c.txt"), "--edges", str(tmp_path / "e.txt"))
    assert code == 0 and parse_instance(out).target == 7
    code, out, _ = run(capsys, "generate", "binpack", "--bins", "2", "--capacity", "5", "--items", str(tmp_path / "i.txt"))
    assert code == 0 and parse_instance(out).max_route_length == 2
    code, _, err = run(capsys, "generate", "binpack", "--bins", "3", "--capacity", "5", "--items", str(tmp_path / "i.txt"))
    assert code == 2 and "sum" in err


def test_exit_codes_for_errors(capsys, files, tmp_path):
    assert run(capsys, "solve", "--algo", "xp", "--instance", str(tmp_path / "missing.json"))[0] == 2
    (tmp_path / "junk.json").write_text("{")
    assert run(capsys, "solve", "--algo", "xp", "--instance", str(tmp_path / "junk.json"))[0] == 2
    assert run(capsys, "solve", "--algo", "magic", "--instance", str(files / "k2.json"))[0] == 2
    assert run(capsys, "solve", "--algo", "brute", "--instance", str(files / "k2.json"), "--budget", "1")[0] == 3
    assert run(capsys, "solve", "--algo", "fpt", "--instance", str(files / "k2.json"), "--table-limit", "1")[0] == 3


def test_bench_csv(capsys, tmp_path):
    suite = {"algos": ["brute", "xp", "fpt"],
             "instances": [{"name": "z", "instance": {"num_vertices": 2, "edges": [[0, 1, 1]], "tasks": []}},
                           {"name": "r", "random": {"n": 6, "max_degree": 3, "max_capacity": 3,
                                                    "task_count": 3, "seeds": [2, 1]}}]}
    path = tmp_path / "suite.json"
    path.write_text(json.dumps(suite))
    code, out, _ = run(capsys, "bench", "--suite", str(path))
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["instance", "algo", "optimum", "nodes", "max_table_size", "wall_ms"]
    assert [r[0] for r in rows[1:]] == ["r-1"] * 3 + ["r-2"] * 3 + ["z"] * 3
    for i in range(1, len(rows), 3):
        assert len({r[2] for r in rows[i:i + 3]}) == 1
    again = run(capsys, "bench", "--suite", str(path))[1]
    strip = lambda text: [r[:-1] for r in csv.reader(io.StringIO(text))]
    assert strip(again) == strip(out)


def test_deterministic_output(capsys, tmp_path):
    a = run(capsys, "generate", "random", "--n", "8", "--seed", "5")[1]
    b = run(capsys, "generate", "random", "--n", "8", "--seed", "5")[1]
    assert a == b


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "unsplittable", "solve", "--algo", "xp",
                           "--instance", str(files / "k2.json")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == "profit=7 decision=yes\n"
