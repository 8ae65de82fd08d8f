import io
import sys

import pytest
from hypothesis import given, settings, strategies as st

from coarsesim.cli import main
from coarsesim.generate import random_problem_text
from coarsesim.model import parse_problem

CHAIN_TEXT = "ts 3\n0 1\n1 2\nend\n"


def call(args, stdin=""):
    out, err = io.StringIO(), io.StringIO()
    code = main(args, io.StringIO(stdin), out, err)
    return code, out.getvalue(), err.getvalue()


def test_sim_chain():
    code, out, _ = call(["sim", "--input", "-"], CHAIN_TEXT)
    assert code == 0
    assert out == "blocks 3\n0: 0\n1: 1\n2: 2\nrel\n1 0\n2 0\n2 1\nend\n"


def test_sim_no_transitions_echoes_preorder():
    text = "ts 2\nend\nblocks\n0: 1\n1: 0\nend\nrel\n0 1\nend\n"
    code, out, _ = call(["sim", "--input", "-"], text)
    assert code == 0
    assert out == "blocks 2\n0: 0\n1: 1\nrel\n1 0\nend\n"


def test_sim_with_checks(tmp_path):
    src = tmp_path / "chain.txt"
    src.write_text(CHAIN_TEXT)
    dst = tmp_path / "out.txt"
    code, out, _ = call(["sim", "--input", str(src), "--output", str(dst), "--checks", "full"])
    assert code == 0 and out == ""
    assert dst.read_text().startswith("blocks 3\n")


@pytest.mark.parametrize("args, stdin", [
    (["sim", "--input", "-"], "ts 3\n0 x\nend\n"),
    (["sim", "--input", "/nonexistent/file"], ""),
    (["sim"], ""),
    (["frobnicate"], ""),
    (["gen", "--seed", "1", "--states", "2", "--arcs", "5"], ""),
    (["stats", "--input", "-"], "ts 2\n"),
])
def test_input_errors(args, stdin):
    code, out, err = call(args, stdin)
    assert code == 1
    assert err.startswith("error:")


def test_malformed_reports_line():
    _, _, err = call(["sim", "--input", "-"], "ts 3\n0 x\nend\n")
    assert "line 2" in err


def test_verify():
    code, out, _ = call(["verify", "--input", "-"], CHAIN_TEXT)
    assert code == 0 and out.startswith("ok")


def test_verify_cap():
    code, _, err = call(["verify", "--input", "-", "--oracle-cap", "2"], CHAIN_TEXT)
    assert code == 1
    assert "oracle cap exceeded" in err


def test_verify_mismatch(monkeypatch):
    from coarsesim import cli
    from coarsesim.model import PartitionRelationPair
    monkeypatch.setattr(cli.engine, "run", lambda ts, prp: PartitionRelationPair.total(3))
    code, out, _ = call(["verify", "--input", "-"], CHAIN_TEXT)
    assert code == 3
    assert out == "mismatch at pair 0 1 (engine only)\n"


def test_invariant_violation_exit(monkeypatch):
    from coarsesim import cli
    from coarsesim.model import InvariantViolation

    def broken(*args):
        raise InvariantViolation("boom")
    monkeypatch.setattr(cli.engine, "run", broken)
    code, _, err = call(["sim", "--input", "-", "--checks", "full"], CHAIN_TEXT)
    assert code == 2
    assert "boom" in err


def test_quotient_fork():
    code, out, _ = call(["quotient", "--input", "-"], "ts 3\n0 2\n1 2\nend\n")
    assert code == 0
    assert out == "ts 2\n0 1\nend\n# 0: 0 1\n# 1: 2\n"


def test_quotient_identity_preorder():
    text = "ts 3\n0 1\n1 2\n2 0\nend\nlabel 0 a\nlabel 1 b\nlabel 2 c\n"
    code, out, _ = call(["quotient", "--input", "-"], text)
    assert code == 0
    assert out.startswith("ts 3\n0 1\n1 2\n2 0\nend\n")


def test_quotient_cycle_deduplicates():
    code, out, _ = call(["quotient", "--input", "-"], "ts 2\n0 1\n1 0\nend\n")
    assert out == "ts 1\n0 0\nend\n# 0: 0 1\n"
    ts, _ = parse_problem(out)
    assert len(ts) == 1


def test_gen_fixed():
    code, out, _ = call(["gen", "--seed", "1", "--states", "3", "--arcs", "0"])
    assert code == 0
    assert out == "# seed 1, 3 states, 0 transitions, preorder qxq\nts 3\nend\n"


@settings(max_examples=50)
@given(st.integers(0, 2**63 - 1), st.integers(1, 6), st.sampled_from(["qxq", "labels", "explicit"]),
       st.data())
def test_gen_deterministic_and_valid(seed, n, mode, data):
    arcs = data.draw(st.integers(0, n * n))
    args = ["gen", "--seed", str(seed), "--states", str(n), "--arcs", str(arcs), "--preorder", mode]
    first = call(args)
    assert first == call(args)
    ts, _ = parse_problem(first[1])
    assert (ts.num_states, len(ts)) == (n, arcs)


def test_stats():
    code, out, _ = call(["stats", "--input", "-"], CHAIN_TEXT)
    report = dict(line.split(": ") for line in out.splitlines())
    assert code == 0
    assert report["final_blocks"] == "3"
    assert int(report["relcount_entries"]) <= 9
    empty = dict(line.split(": ") for line in call(["stats", "--input", "-"], "ts 4\nend\n")[1]
                 .splitlines())
    assert empty["iterations"] == "0"


@pytest.mark.parametrize("command", ["sim", "verify", "quotient", "stats"])
def test_commands_are_deterministic(command):
    text = random_problem_text(7, 6, 12, "explicit")
    assert call([command, "--input", "-"], text) == call([command, "--input", "-"], text)


def test_module_entry_point(tmp_path):
    import subprocess
    src = tmp_path / "chain.txt"
    src.write_text(CHAIN_TEXT)
    done = subprocess.run([sys.executable, "-m", "coarsesim", "verify", "--input", str(src)],
                          capture_output=True, text=True)
    assert done.returncode == 0 and done.stdout.startswith("ok")
    bad = subprocess.run([sys.executable, "-m", "coarsesim", "sim", "--input", "-"],
                         input="ts 1\n0 7\nend\n", capture_output=True, text=True)
    assert bad.returncode == 1 and "line 2" in bad.stderr
