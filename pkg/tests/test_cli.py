import os

import pytest

from src.cli_runner import EXIT_FAILED, EXIT_OK, EXIT_UNUSABLE, CliConfig, build_parser, main
from src.errors import RejectReason
from src.messages import Reject
from src.wire_codec import encode

from tests.conftest import SCENARIO_DIR

HAPPY = os.path.join(SCENARIO_DIR, "happy_path.scenario")


def write(path, content):
    path.write_text(content, encoding="utf-8")
    return str(path)


def test_run_writes_the_trace(tmp_path, capsys):
    out = tmp_path / "traces" / "happy.txt"
    assert main(["run", "--scenario", HAPPY, "--out", str(out)]) == EXIT_OK
    assert out.read_text(encoding="utf-8").startswith("#0 ")
    assert "passed" in capsys.readouterr().err


def test_run_to_stdout(capsys):
    assert main(["run", "--scenario", HAPPY]) == EXIT_OK
    assert "VisaRequest" in capsys.readouterr().out


def test_failed_expectation(tmp_path, capsys):
    scenario = write(tmp_path / "bad.scenario", "ca CA\nhn HN1\nfn FN1\nmu alice HN1\nexpect accepted\n")
    assert main(["run", "--scenario", scenario, "--out", str(tmp_path / "t.txt")]) == EXIT_FAILED
    assert "FAIL line 5: expect accepted" in capsys.readouterr().err


@pytest.mark.parametrize(
    "content",
    ["ca CA\nteleport alice\n", "ca CA\nhn HN1\nmu alice HN7\n"],
    ids=["parse-error", "undeclared-actor"],
)
def test_unusable_scenario(tmp_path, content):
    scenario = write(tmp_path / "broken.scenario", content)
    assert main(["run", "--scenario", scenario]) == EXIT_UNUSABLE


def test_second_revocation_of_a_visa_keeps_the_exit_code(tmp_path):
    steps = "ca CA\nhn HN1\nfn FN1\nmu alice HN1\nacquire alice FN1\ndeliver all\nrevoke-visa alice 1\ndeliver all\n"
    scenario = write(tmp_path / "twice.scenario", steps + "revoke-visa alice 1\nexpect reject stale\n")
    assert main(["run", "--scenario", scenario, "--out", str(tmp_path / "t.txt")]) == EXIT_FAILED


def test_missing_scenario_file(tmp_path):
    assert main(["run", "--scenario", str(tmp_path / "absent.scenario")]) == EXIT_UNUSABLE


def test_provision_refuses_to_overwrite(tmp_path, capsys):
    out = str(tmp_path / "world")
    assert main(["provision", "--out", out]) == EXIT_OK
    assert os.path.join(out, "alice.card") in capsys.readouterr().out.splitlines()
    assert main(["provision", "--out", out]) == EXIT_FAILED
    assert "refusing to overwrite" in capsys.readouterr().err


def test_dump(tmp_path, capsys):
    message = tmp_path / "reject.bin"
    message.write_bytes(encode(Reject(RejectReason.STALE)))
    assert main(["dump", str(message)]) == EXIT_OK
    assert capsys.readouterr().out.startswith("Reject")
    assert main(["dump", str(tmp_path / "absent.bin")]) == EXIT_FAILED


def test_attack_suite_exit_codes(tmp_path):
    assert main(["attack-suite", "--seed", "2", "--out", str(tmp_path / "default.txt")]) == EXIT_OK
    report = tmp_path / "unauth.txt"
    assert main(["attack-suite", "--suite", "unauthenticated", "--out", str(report)]) == EXIT_FAILED
    assert "[FAIL] mutual-authentication" in report.read_text(encoding="utf-8")
    assert main(["attack-suite", "--suite", "rot13"]) == EXIT_UNUSABLE


def test_output_path_from_environment(tmp_path, monkeypatch):
    target = tmp_path / "from-env.txt"
    monkeypatch.setenv("PVKIT_OUT", str(target))
    config = CliConfig.from_args(build_parser().parse_args(["run", "--scenario", HAPPY, "-vv"]))
    assert config.output_path == str(target)
    assert config.verbosity == 2
    assert config.seed is None


def test_bad_configuration(tmp_path, monkeypatch):
    config = tmp_path / "pvkit.json"
    config.write_text('{"freshness_window": "a while"}', encoding="utf-8")
    monkeypatch.setattr("utils.CONFIG", str(config))
    assert main(["run", "--scenario", HAPPY]) == EXIT_UNUSABLE


def test_unknown_command():
    with pytest.raises(SystemExit):
        main(["teleport"])
