import json

import pytest

from anonview.cli import main
from conftest import SCORES_ROWS, SCORES_SCHEMA, write_relation_csv_file

SCHEMA_DECL = "age:int,nationality:str,score:int"


@pytest.fixture
def scores_csv(tmp_path):
    path = tmp_path / "scores.csv"
    write_relation_csv_file(path, SCORES_SCHEMA, SCORES_ROWS)
    return path


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_plan_outputs_case_study_parameters(capsys):
    assert main(["plan", "--n", "30162", "--m", "648023040", "--k", "10", "--gamma", "0.2"]) == 0
    payload = _json_out(capsys)
    assert payload["alpha"] == 0.5
    assert abs(payload["beta"] - 9.5e-4) / 9.5e-4 < 0.03
    assert 19 <= payload["expected_view_size"] / 30162 <= 22


def test_plan_rejects_aggressive_budget(capsys):
    assert main(["plan", "--n", "30", "--m", "1000", "--k", "5", "--gamma", "0.2"]) == 2
    assert "too aggressive" in capsys.readouterr().err


def test_publish_estimate_round_trip(tmp_path, scores_csv, capsys):
    out = tmp_path / "pub"
    code = main(
        ["publish", "--input", str(scores_csv), "--schema", SCHEMA_DECL,
         "--out-dir", str(out), "--seed", "3", "--alpha", "1.0", "--beta", "0.0"]
    )
    assert code == 0
    payload = _json_out(capsys)
    assert payload["n"] == 6 and payload["view_size"] == 6

    code = main(
        ["estimate", "--view-dir", str(out),
         "--query", "age in [26,32] and score in [90,100]"]
    )
    assert code == 0
    report = _json_out(capsys)
    assert report["estimate"] == 2.0
    assert report["n_d"] == 24


def test_estimate_reports_radius(tmp_path, scores_csv, capsys):
    out = tmp_path / "pub"
    main(["publish", "--input", str(scores_csv), "--schema", SCHEMA_DECL,
          "--out-dir", str(out), "--seed", "3", "--alpha", "1.0", "--beta", "0.0"])
    capsys.readouterr()
    assert main(["estimate", "--view-dir", str(out), "--query", "", "--r", "4",
                 "--failure-prob", "0.1", "--n", "6"]) == 0
    report = _json_out(capsys)
    assert report["guarantee_radius"] is not None and report["guarantee_radius"] > 0


def test_publish_requires_seed(scores_csv, tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["publish", "--input", str(scores_csv), "--schema", SCHEMA_DECL,
              "--out-dir", str(tmp_path / "x"), "--alpha", "0.5", "--beta", "0.1"])
    assert err.value.code == 2


def test_publish_data_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("age,nationality,score\ntwenty,British,99\n")
    code = main(["publish", "--input", str(bad), "--schema", SCHEMA_DECL,
                 "--out-dir", str(tmp_path / "out"), "--seed", "1",
                 "--alpha", "0.5", "--beta", "0.1"])
    assert code == 3
    assert "not an integer" in capsys.readouterr().err


def test_publish_config_error_exit_code(scores_csv, tmp_path, capsys):
    code = main(["publish", "--input", str(scores_csv), "--schema", SCHEMA_DECL,
                 "--out-dir", str(tmp_path / "out"), "--seed", "1",
                 "--alpha", "0.5", "--beta", "0.1", "--k", "10", "--gamma", "0.2"])
    assert code == 2


def test_attack_reports_positive_leakage(capsys):
    code = main(["attack", "--prior", "0.001", "--alpha", "0.5", "--beta", "0.0001",
                 "--d", "0.01", "--gamma", "0.2"])
    assert code == 0
    payload = _json_out(capsys)
    assert payload["leakage"] == "positive"
    assert payload["posterior"] > 0.2


def test_attack_exclusive_model(capsys):
    code = main(["attack", "--prior", "0.1", "--alpha", "0.5", "--beta", "0.1",
                 "--d", "0.15", "--gamma", "0.6", "--model", "exclusive"])
    assert code == 0
    payload = _json_out(capsys)
    assert payload["posterior"] == pytest.approx(0.5)
    assert payload["leakage"] == "none"


def test_experiment_writes_reports(tmp_path, scores_csv, capsys):
    out = tmp_path / "exp"
    code = main(["experiment", "--input", str(scores_csv), "--schema", SCHEMA_DECL,
                 "--out-dir", str(out), "--seed", "4", "--alpha", "0.5", "--beta", "0.01",
                 "--arity", "2", "--ranges-per-attribute", "3", "--bands", "1,10,100"])
    assert code == 0
    payload = _json_out(capsys)
    assert (out / "scatter.csv").exists()
    assert (out / "summary.json").exists()
    assert (out / "scatter.png").exists()
    assert payload["query_count"] > 10


def test_frontier_values_and_files(tmp_path, capsys):
    out = tmp_path / "fr"
    code = main(["frontier", "--n", "100", "--m", "1000000", "--c", "1",
                 "--gamma-grid", "0.1:0.3:3", "--out-dir", str(out)])
    assert code == 0
    payload = _json_out(capsys)
    mid = payload["points"][1]
    assert mid["gamma"] == pytest.approx(0.2)
    assert mid["d_threshold"] == pytest.approx(0.025)
    assert (out / "frontier.csv").exists() and (out / "frontier.png").exists()


def test_sd_demo_sweep(tmp_path, capsys):
    out = tmp_path / "sd"
    code = main(["sd-demo", "--m", "8", "--n", "2", "--f", "0.25",
                 "--sweep", "0.5:0.5,0.9:0.1", "--out-dir", str(out)])
    assert code == 0
    payload = _json_out(capsys)
    assert payload["runs"][0]["fraction_below_threshold"] == 1.0
    assert payload["runs"][0]["meaningless"] is True
    assert payload["runs"][1]["fraction_below_threshold"] <= payload["runs"][0]["fraction_below_threshold"]
    assert (out / "sd_per_query.csv").exists()
    assert (out / "sd.png").exists() and (out / "sd_sweep.png").exists()


def test_sd_demo_requires_parameters(tmp_path, capsys):
    code = main(["sd-demo", "--m", "8", "--n", "2", "--out-dir", str(tmp_path / "sd")])
    assert code == 2
