from pathlib import Path

from vodplan.cli import (
    EXIT_INFEASIBLE,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_SIM_DISAGREE,
    EXIT_VALIDATION,
    main,
)

GOOD = """
name = "cli-fixture"
architecture = "centralized"

[cluster]
clusters = 5
households = 100
penetration = 0.5
normal_rate = 2.0
interactive_rate = 4.0
normal_hold = "90min"
interactive_hold = "6s"
peak_period = "7h"
multicast_factor = 5.0

[[service]]
label = "SD"
stream_rate = "3Mbps"

[provisioning]
blocking_target = 0.05

[sim]
seed = 11
horizon_offers = 4000
warmup_offers = 400
"""


def write(tmp_path: Path, text: str, name: str = "scenario.toml") -> str:
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_plan_writes_csv(tmp_path):
    out = tmp_path / "out.csv"
    code = main(["plan", "-s", write(tmp_path, GOOD), "-o", str(out)])
    assert code == EXIT_OK
    text = out.read_text(encoding="utf-8")
    assert text.splitlines()[0].startswith("households,")
    assert len(text.splitlines()) == 2


def test_plan_report_format(tmp_path, capsys):
    code = main(["plan", "-s", write(tmp_path, GOOD), "--format", "report"])
    assert code == EXIT_OK
    captured = capsys.readouterr().out
    assert "vodplan report: cli-fixture" in captured
    assert "scenario echo" in captured


def test_plan_accepts_bundled_names(tmp_path):
    out = tmp_path / "bundled.csv"
    assert main(["plan", "-s", "table1-sd", "-o", str(out)]) == EXIT_OK
    assert "M_c" in out.read_text(encoding="utf-8").splitlines()[0]


def test_parse_error_exit_code(tmp_path, capsys):
    path = write(tmp_path, "name = \n", "broken.toml")
    assert main(["plan", "-s", path]) == EXIT_PARSE
    assert "parse error" in capsys.readouterr().err


def test_missing_scenario_exit_code(capsys):
    assert main(["plan", "-s", "definitely-not-there"]) == EXIT_PARSE


def test_validation_error_exit_code(tmp_path, capsys):
    bad = GOOD.replace("multicast_factor = 5.0", "multicast_factor = 0.0")
    assert main(["plan", "-s", write(tmp_path, bad)]) == EXIT_VALIDATION
    assert "multicast_factor" in capsys.readouterr().err


def test_unit_error_exit_code(tmp_path, capsys):
    bad = GOOD.replace('normal_hold = "90min"', "normal_hold = 5400")
    assert main(["plan", "-s", write(tmp_path, bad)]) == EXIT_VALIDATION
    assert "normal_hold" in capsys.readouterr().err


def test_infeasible_exit_code(tmp_path, capsys):
    bad = GOOD.replace("blocking_target = 0.05", "blocking_target = 0.05\nport_cap = 3")
    out = tmp_path / "partial.csv"
    assert main(["plan", "-s", write(tmp_path, bad), "-o", str(out)]) == EXIT_INFEASIBLE
    # output is still written, with the error recorded in the row
    assert "infeasible" in capsys.readouterr().err
    assert out.exists()


def test_simulate_deterministic_bytes(tmp_path):
    path = write(tmp_path, GOOD)
    out1 = tmp_path / "run1.csv"
    out2 = tmp_path / "run2.csv"
    assert main(["simulate", "-s", path, "-o", str(out1), "--seed", "99"]) == EXIT_OK
    assert main(["simulate", "-s", path, "-o", str(out2), "--seed", "99"]) == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()


def test_simulate_disagreement_exit_code(tmp_path, capsys):
    bad = GOOD.replace(
        "[sim]",
        '[sim]\nmulticast_window = "0s"',
    )
    out = tmp_path / "disagree.csv"
    code = main(["simulate", "-s", write(tmp_path, bad), "-o", str(out)])
    assert code == EXIT_SIM_DISAGREE
    assert "beyond" in capsys.readouterr().err
    assert out.exists()


def test_validate_runs_clean(capsys):
    assert main(["validate", "--quick"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "all" in out and "self-checks passed" in out
    assert "approximation error" in out


def test_validate_lists_bundled(capsys):
    assert main(["validate", "--list-bundled"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "table1-sd" in out
    assert "sec4-distributed" in out


def test_validate_with_scenario_echo(tmp_path, capsys):
    assert main(["validate", "--quick", "-s", write(tmp_path, GOOD), "--echo"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "loads and validates" in out
    assert 'name = "cli-fixture"' in out
