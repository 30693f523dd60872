import json
import os
import subprocess
import sys

import numpy as np
import pytest

from hermgeom import cli


def run_json(argv):
    text, code = cli.run(argv)
    return json.loads(text), code


def test_zoo_list():
    data, code = run_json(["zoo", "list"])
    assert code == 0
    assert [e["name"] for e in data] == ["hopf", "flat_torus", "fubini_study", "random_metric", "periodic_torus"]


def test_point_report_hopf():
    data, code = run_json(["point-report", "--manifold", "hopf", "--point", "1,0"])
    assert code == 0
    assert np.allclose(data["ricci2"]["re"], np.eye(2)) and np.allclose(data["ricci2"]["im"], 0)
    assert np.isclose(data["adjoint_torsion_norm_sq"], 0.25)
    assert np.allclose(data["ricci1"]["re"], np.diag([0, 2]))
    assert data["config"]["params"] == {}


def test_point_report_flat_and_fs():
    data, _ = run_json(["point-report", "--manifold", "flat_torus", "--point", "0.3,0.1+0.2i"])
    for key in ("ricci1", "ricci2", "lc_ricci1", "q"):
        assert not np.any(data[key]["re"]) and not np.any(data[key]["im"])
    data, _ = run_json(["point-report", "--manifold", "fubini_study", "--point", "0,0"])
    assert np.allclose(data["ricci1"]["re"], 3 * np.eye(2))


def test_identity_suite_examples():
    data, code = run_json(["identity-suite", "--manifold", "hopf"])
    assert code == 0 and data["all_passed"]
    assert all(r["verdict"] == "pass" for r in data["reports"])
    data, code = run_json(["identity-suite", "--manifold", "random_metric", "--param", "seed=42"])
    verdicts = {r["identity"]: r["verdict"] for r in data["reports"]}
    assert code == 0
    for name in ("curvature_relation", "surface_q_identity", "gamma_torsion_relation"):
        assert verdicts[name] == "pass"
    assert verdicts["whe_proportionality"] == "not-applicable"
    data, code = run_json(["identity-suite", "--manifold", "flat_torus"])
    assert code == 0


def test_identity_failure_exit_code():
    # claiming a false property turns a recorded residual into a failing assertion
    _, code = cli.run(["identity-suite", "--manifold", "random_metric", "--assume", "whe", "--points", "10"])
    assert code == 1


def test_integrate_examples():
    data, code = run_json(["integrate", "--manifold", "hopf", "--quantity", "c1n", "--samples", "20000"])
    assert code == 0 and abs(data["value"]) < 1e-10
    assert "normalized_value" in data
    data, code = run_json(["integrate", "--manifold", "flat_torus", "--quantity", "c1n", "--samples", "1000"])
    assert data["value"] == 0
    data, code = run_json(["integrate", "--manifold", "hopf", "--quantity", "l2-lemma", "--samples", "20000"])
    assert code == 0 and max(data["pairwise_relative"].values()) < 0.02
    data, code = run_json(["integrate", "--manifold", "hopf", "--quantity", "chern-weil", "--samples", "5000"])
    assert code == 0 and data["report"]["verdict"] == "pass"


def test_integrate_custom_density():
    data, code = run_json(["integrate", "--manifold", "hopf", "--quantity", "custom", "--density", "1",
                           "--samples", "1000"])
    assert code == 0 and np.isclose(data["value"], 128 * np.pi ** 2 * np.log(2))


def test_jet_check_command():
    data, code = run_json(["jet-check", "--manifold", "fubini_study", "--points", "5"])
    assert code == 0 and data["reports"][0]["max_residual"] < 1e-6


def test_metric_file(tmp_path):
    src = tmp_path / "m.hg"
    src.write_text("h11 = 1 + z1*conj(z1)\nh22 = 1\nh12 = 0.1*z2\n")
    data, code = run_json(["identity-suite", "--metric-file", str(src), "--dim", "2", "--points", "10"])
    assert code == 0 and data["manifold"] == str(src)


@pytest.mark.parametrize("argv, code, message", [
    (["point-report", "--manifold", "hopf", "--point", "0,0"], 2, "validity domain"),
    (["point-report", "--manifold", "hopf", "--point", "1,0,0"], 2, "coordinates"),
    (["point-report", "--manifold", "nope", "--point", "1"], 2, "unknown zoo entry"),
    (["integrate", "--manifold", "random_metric", "--quantity", "l2-lemma", "--samples", "100"], 2, "Gauduchon"),
    (["identity-suite"], 2, "manifold is required"),
])
def test_usage_exit_codes(argv, code, message, capsys):
    assert cli.main(argv) == code
    assert message in capsys.readouterr().err


def test_parse_error_exit_code(tmp_path, capsys):
    src = tmp_path / "bad.hg"
    src.write_text("h11 = 1\nh22 = (z1 +\n")
    assert cli.main(["point-report", "--metric-file", str(src), "--dim", "2", "--point", "0,0"]) == 2
    assert "line 2" in capsys.readouterr().err


def test_singular_metric_exit_code(tmp_path, capsys):
    src = tmp_path / "sing.hg"
    src.write_text("h11 = z1*conj(z1)\nh22 = 1\n")
    assert cli.main(["point-report", "--metric-file", str(src), "--dim", "2", "--point", "0,0"]) == 3
    assert "numerical error" in capsys.readouterr().err


def test_argparse_usage_error():
    with pytest.raises(SystemExit) as info:
        cli.main(["integrate", "--manifold", "hopf"])
    assert info.value.code == 2


def test_output_formats():
    argv = ["identity-suite", "--manifold", "hopf", "--points", "5"]
    csv_text, _ = cli.run(argv + ["--format", "csv"])
    assert csv_text.splitlines()[0].startswith("identity,n,points")
    pretty, _ = cli.run(argv + ["--format", "pretty"])
    assert "verdict" in pretty.splitlines()[0]
    report, _ = cli.run(["point-report", "--manifold", "hopf", "--point", "1,0", "--format", "csv"])
    assert report.splitlines()[0] == "key,value"


def test_clean_json_values():
    assert cli._clean(np.array([1 + 2j])) == {"re": [1.0], "im": [2.0]}
    assert cli._clean(float("nan")) is None
    assert str(cli._clean(-0.0)) == "0.0"


def test_byte_identical_reruns_in_process():
    for argv in (["identity-suite", "--manifold", "random_metric", "--param", "seed=3", "--seed", "5"],
                 ["integrate", "--manifold", "periodic_torus", "--quantity", "chern-weil", "--samples", "3000",
                  "--seed", "9"]):
        assert cli.run(argv)[0] == cli.run(argv)[0]


def test_thread_count_does_not_change_output():
    argv = ["integrate", "--manifold", "hopf", "--quantity", "l2-lemma", "--samples", "20000"]
    assert cli.run(argv + ["--threads", "1"])[0] == cli.run(argv + ["--threads", "3"])[0]


def test_module_entry_point():
    env = dict(os.environ, HERMGEOM_THREADS="2")
    argv = [sys.executable, "-m", "hermgeom", "identity-suite", "--manifold", "hopf", "--points", "5"]
    out = subprocess.run(argv, capture_output=True, text=True, env=env, check=False)
    assert out.returncode == 0
    assert out.stdout.rstrip("\n") == cli.run(argv[3:])[0]
