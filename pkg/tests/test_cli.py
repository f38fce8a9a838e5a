from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from cptlab import Network, parse, save, serialize
from cptlab.cli import main
from cptlab.model import DEFAULT, ELICITED

from hepar import hepar_network


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def hepar_file(tmp_path) -> str:
    path = tmp_path / "net.cptn"
    save(hepar_network(), path)
    return str(path)


def write_doc(tmp_path, mutate) -> str:
    doc = json.loads(serialize(hepar_network()))
    mutate(doc)
    path = tmp_path / "mutated.cptn"
    path.write_text(json.dumps(doc))
    return str(path)


def quad_column_file(tmp_path) -> str:
    net = Network()
    spec = net.create_node("x", ["a", "b", "c", "d"])
    for i in range(3):
        net.add_parent(spec.id, net.create_node(f"p{i}").id)
    net.set_columns(spec.id, range(8), [0.1, 0.2, 0.3, 0.4], DEFAULT)
    path = tmp_path / "quad.cptn"
    save(net, path)
    return str(path)


def write_script(tmp_path, steps) -> str:
    path = tmp_path / "session.cpts.jsonl"
    path.write_text("\n".join(json.dumps(s) for s in steps) + "\n")
    return str(path)


class TestValidateCommand:
    def test_clean_fixture_exits_zero_with_empty_report(self, runner):
        from conftest import HEPAR_FIXTURE
        result = runner.invoke(main, ["validate", str(HEPAR_FIXTURE),
                                      "--tol", "1e-4"])
        assert result.exit_code == 0
        assert result.output == ""

    def test_short_sum_column_reported_once(self, runner, tmp_path):
        path = write_doc(tmp_path, lambda doc: doc["cpts"]["gallstones"]
                         .__setitem__("values", [0.5, 0.4]))
        result = runner.invoke(main, ["validate", path, "--tol", "1e-4"])
        assert result.exit_code == 2
        assert result.output == \
            "gallstones[0]: sum is 0.9 (off by -1.000e-01)\n"

    def test_never_elicited_columns_reported(self, runner, tmp_path):
        path = write_doc(tmp_path, lambda doc: doc["cpts"]["gallstones"]
                         .__setitem__("status", ["default"]))
        result = runner.invoke(main, ["validate", path])
        assert result.exit_code == 2
        assert result.output == "gallstones[0]: never elicited\n"

    def test_missing_file_exits_one(self, runner):
        result = runner.invoke(main, ["validate", "no-such-file.cptn"])
        assert result.exit_code == 1
        assert "cannot read" in result.stderr

    def test_malformed_file_exits_one(self, runner, tmp_path):
        path = tmp_path / "broken.cptn"
        path.write_text("{not json")
        result = runner.invoke(main, ["validate", str(path)])
        assert result.exit_code == 1
        assert "SyntaxError" in result.stderr


FULL_TREE = """\
Alcoholism
  absent
    Hepatotoxic medications
      absent
        Gallstones
          absent | 0.015306 0.193878 0.0867343 0.168367 0.204082 0.331633 | elicited
          present | 0.00381721 0.19084 0.00381721 0.0381684 0.0381684 0.725189 | elicited
      present
        Gallstones
          absent | 0.00523595 0.157068 0.157068 0.157068 0.157068 0.366492 | elicited
          present | 0.041667 0.416666 0.041667 0.041667 0.041667 0.416666 | elicited
  present
    Hepatotoxic medications
      absent
        Gallstones
          absent | 0.01923 0.21154 0.23077 0.48077 0.01923 0.03846 | elicited
          present | 0.04166703 0.41666594 0.04166703 0.04166659 0.04166703 0.41666638 | elicited
      present
        Gallstones
          absent | 0.04 0.8 0.04 0.04 0.04 0.04 | elicited
          present | 0.16666667 0.16666667 0.16666667 0.16666667 0.16666667 0.16666665 | elicited
"""

DEPTH_ONE_TREE = """\
Alcoholism
  absent …
  present …
"""


class TestTreeCommand:
    def test_full_depth_golden(self, runner, hepar_file):
        result = runner.invoke(main, ["tree", hepar_file, "disorder"])
        assert result.exit_code == 0
        assert result.output == FULL_TREE

    def test_depth_one_collapses_deeper_levels(self, runner, hepar_file):
        result = runner.invoke(main, ["tree", hepar_file, "disorder",
                                      "--depth", "1"])
        assert result.exit_code == 0
        assert result.output == DEPTH_ONE_TREE

    def test_parentless_node_is_one_leaf_line(self, runner, hepar_file):
        result = runner.invoke(main, ["tree", hepar_file, "gallstones"])
        assert result.exit_code == 0
        assert result.output == "Gallstones | 0.5 0.5 | elicited\n"

    def test_unknown_node_exits_one(self, runner, hepar_file):
        result = runner.invoke(main, ["tree", hepar_file, "ghost"])
        assert result.exit_code == 1
        assert "UnknownNode" in result.stderr


UNSHRUNK_TABLE_HEADER = (
    "Alcoholism | absent |  |  |  | present |  |  | ",
    "Hepatotoxic medications | absent |  | present |  | absent |  | present | ",
    "Gallstones | absent | present | absent | present | absent | present"
    " | absent | present",
)

REORDERED_SHRUNK_TABLE = """\
Gallstones | absent | present |  |  |
Alcoholism | … | absent |  | present |
Hepatotoxic medications | … | absent | present | absent | present
Active_hepat | … | 0.00381721 | 0.041667 | 0.04166703 | 0.16666667
Active_chron | … | 0.19084 | 0.416666 | 0.41666594 | 0.16666667
Toxic_hepat | … | 0.00381721 | 0.041667 | 0.04166703 | 0.16666667
Alcoholic_st | … | 0.0381684 | 0.041667 | 0.04166659 | 0.16666667
Funct_hiper | … | 0.0381684 | 0.041667 | 0.04166703 | 0.16666667
Primary_bili | … | 0.725189 | 0.416666 | 0.41666638 | 0.16666665
status | … | elicited | elicited | elicited | elicited
"""


class TestTableCommand:
    def test_unshrunk_header_layout(self, runner, hepar_file):
        result = runner.invoke(main, ["table", hepar_file, "disorder"])
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert tuple(lines[:3]) == UNSHRUNK_TABLE_HEADER
        assert len(lines) == 3 + 6 + 1
        assert lines[3].startswith("Active_hepat | 0.015306 | ")

    def test_shrunk_branch_golden_after_reorder(self, runner, hepar_file,
                                                tmp_path):
        script = write_script(tmp_path, [
            {"op": "reorder", "node": "disorder", "permutation": [2, 0, 1]},
        ])
        reordered = str(tmp_path / "reordered.cptn")
        result = runner.invoke(main, ["apply", hepar_file, script,
                                      "-o", reordered])
        assert result.exit_code == 0
        result = runner.invoke(main, ["table", reordered, "disorder",
                                      "--shrink", "absent"])
        assert result.exit_code == 0
        assert result.output == REORDERED_SHRUNK_TABLE

    def test_shrink_accepts_outcome_indexes(self, runner, hepar_file):
        by_name = runner.invoke(main, ["table", hepar_file, "disorder",
                                       "--shrink", "absent,present"])
        by_index = runner.invoke(main, ["table", hepar_file, "disorder",
                                        "--shrink", "0,1"])
        assert by_name.output == by_index.output

    def test_unknown_outcome_name_exits_one(self, runner, hepar_file):
        result = runner.invoke(main, ["table", hepar_file, "disorder",
                                      "--shrink", "nonesuch"])
        assert result.exit_code == 1


class TestApplyCommand:
    def test_lock_and_set_session(self, runner, tmp_path):
        source = quad_column_file(tmp_path)
        script = write_script(tmp_path, [
            {"op": "select", "node": "x", "contexts": [[0, 0, 0]]},
            {"op": "lock", "outcome": 3},
            {"op": "set", "outcome": 0, "target": 0.2},
            {"op": "commit"},
        ])
        out = str(tmp_path / "out.cptn")
        result = runner.invoke(main, ["apply", source, script, "-o", out])
        assert result.exit_code == 0
        net = parse(Path(out).read_bytes())
        assert net.get_distribution("x", (0, 0, 0)) == \
            pytest.approx([0.2, 0.16, 0.24, 0.4], abs=1e-12)
        assert net.cpts["x"].status[0] == ELICITED
        assert net.cpts["x"].status[1] == DEFAULT
        assert net.get_distribution("x", (0, 0, 1)) == [0.1, 0.2, 0.3, 0.4]

    def test_replay_is_byte_deterministic(self, runner, tmp_path):
        source = quad_column_file(tmp_path)
        script = write_script(tmp_path, [
            {"op": "select", "node": "x", "contexts": [[0, 0, 0], [1, 1, 1]]},
            {"op": "lock", "outcome": 3},
            {"op": "unlock", "outcome": 3},
            {"op": "set", "outcome": 1, "target": 0.55},
            {"op": "commit"},
            {"op": "reorder", "node": "x", "permutation": [1, 2, 0]},
        ])
        outputs = []
        for name in ("a.cptn", "b.cptn"):
            out = str(tmp_path / name)
            result = runner.invoke(main, ["apply", source, script, "-o", out])
            assert result.exit_code == 0
            outputs.append(Path(out).read_bytes())
        assert outputs[0] == outputs[1]

    def test_domain_error_exits_three_with_engine_error_name(self, runner,
                                                             tmp_path):
        source = quad_column_file(tmp_path)
        script = write_script(tmp_path, [
            {"op": "select", "node": "x", "contexts": [[0, 0, 0]]},
            {"op": "lock", "outcome": 0},
            {"op": "set", "outcome": 0, "target": 0.2},
        ])
        result = runner.invoke(main, ["apply", source, script,
                                      "-o", str(tmp_path / "out.cptn")])
        assert result.exit_code == 3
        assert "OutcomeLocked" in result.stderr

    def test_set_without_select_exits_three(self, runner, tmp_path):
        source = quad_column_file(tmp_path)
        script = write_script(tmp_path, [
            {"op": "set", "outcome": 0, "target": 0.2},
        ])
        result = runner.invoke(main, ["apply", source, script,
                                      "-o", str(tmp_path / "out.cptn")])
        assert result.exit_code == 3
        assert "select" in result.stderr

    def test_reorder_invalidates_editor(self, runner, tmp_path):
        source = quad_column_file(tmp_path)
        script = write_script(tmp_path, [
            {"op": "select", "node": "x", "contexts": [[0, 0, 0]]},
            {"op": "reorder", "node": "x", "permutation": [2, 0, 1]},
            {"op": "commit"},
        ])
        result = runner.invoke(main, ["apply", source, script,
                                      "-o", str(tmp_path / "out.cptn")])
        assert result.exit_code == 3
        assert "select" in result.stderr

    def test_malformed_script_exits_one(self, runner, tmp_path):
        source = quad_column_file(tmp_path)
        script = tmp_path / "bad.cpts.jsonl"
        script.write_text('{"op": "select"\n')
        result = runner.invoke(main, ["apply", source, str(script),
                                      "-o", str(tmp_path / "out.cptn")])
        assert result.exit_code == 1
