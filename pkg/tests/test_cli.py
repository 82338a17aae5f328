import json
import os

import pandas as pd
import pytest
import yaml

from fearconnect.config import flatten_keys
from fearconnect.fixtures import generate_fixture
from fearconnect.main import EXIT_DOMAIN_ERROR, EXIT_OK, main

# Kleine Einstellungen, damit der Ende-zu-Ende-Lauf schnell bleibt
FAST_CONFIG = {
    "connectedness": {"lags": 1, "horizon": 5, "sensitivity_lags": [1, 2], "sensitivity_horizons": [3, 5]},
    "rolling": {"window": 40, "step": 10},
    "quarterly": {"window": 20},
    "predictive": {"horizons": [1, 2], "endo_lags": 1, "min_months": 6},
    "runtime": {"threads": 1},
    "logging": {"console_logging": False},
}

FLOW = [
    ["build-indexes"],
    ["connectedness", "--mode", "static"],
    ["connectedness", "--mode", "rolling"],
    ["predict"],
]


def make_dataset(directory, n_days, overrides=FAST_CONFIG):
    paths = generate_fixture(str(directory), n_days=n_days, seed=3, config_overrides=overrides)
    return paths["config"], os.path.join(str(directory), "output")


def snapshot(directory):
    return {name: open(os.path.join(directory, name), "rb").read() for name in sorted(os.listdir(directory))}


def run_flow(config):
    return [main(command + ["--config", config]) for command in FLOW]


def error_record(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    return json.loads(err[-1])


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    return make_dataset(tmp_path_factory.mktemp("fixture"), n_days=300)


@pytest.fixture
def small_dataset(tmp_path):
    return make_dataset(tmp_path, n_days=60)


def test_full_flow_is_reproducible(dataset):
    config, output = dataset
    assert run_flow(config) == [EXIT_OK] * 4
    first = snapshot(output)
    for name in ("panel_aggregate.csv", "panel_positive.csv", "panel_negative.csv", "wvix.csv",
                 "gap_report.json", "static_totals.csv", "afc.csv", "sensitivity.csv",
                 "rolling_totals.csv", "ranking.csv", "monthly_connectedness.csv",
                 "predict_macro.csv", "predict_uncertainty_long.csv", "predict_report.json"):
        assert name in first
    assert "error.json" not in first

    assert run_flow(config) == [EXIT_OK] * 4
    assert snapshot(output) == first


def test_outputs_carry_metadata_header(dataset):
    config, output = dataset
    assert main(["build-indexes", "--config", config]) == EXIT_OK
    with open(os.path.join(output, "panel_aggregate.csv"), encoding="utf-8") as file:
        header = file.readline()
    assert header.startswith("# fearconnect ")
    assert "config=" in header
    panel = pd.read_csv(os.path.join(output, "panel_aggregate.csv"), comment="#", index_col=0)
    assert list(panel.columns) == ["AAA", "BBB", "CCC"]
    assert (panel.to_numpy() > 0).all()


def test_missing_caps_file_names_the_path(small_dataset, capsys):
    config, output = small_dataset
    caps = os.path.join(os.path.dirname(config), "caps.csv")
    os.remove(caps)
    assert main(["build-indexes", "--config", config]) == EXIT_DOMAIN_ERROR
    record = error_record(capsys)
    assert record["error"] == "config_error"
    assert record["details"]["path"] == caps
    with open(os.path.join(output, "error.json"), encoding="utf-8") as file:
        assert json.load(file)["details"]["path"] == caps


def test_missing_cap_entry(small_dataset, capsys):
    config, _ = small_dataset
    caps = os.path.join(os.path.dirname(config), "caps.csv")
    pd.read_csv(caps).iloc[:2].to_csv(caps, index=False)
    assert main(["build-indexes", "--config", config]) == EXIT_DOMAIN_ERROR
    record = error_record(capsys)
    assert record["error"] == "missing_cap"
    assert record["details"]["names"] == ["CCC"]


def test_rolling_window_longer_than_sample(small_dataset, capsys):
    config, _ = small_dataset
    assert main(["build-indexes", "--config", config]) == EXIT_OK
    capsys.readouterr()
    assert main(["connectedness", "--mode", "rolling", "--window", "500", "--config", config]) == EXIT_DOMAIN_ERROR
    record = error_record(capsys)
    assert record["error"] == "insufficient_sample"
    assert record["message"]


def test_connectedness_before_build_indexes(small_dataset, capsys):
    config, _ = small_dataset
    assert main(["connectedness", "--config", config]) == EXIT_DOMAIN_ERROR
    assert error_record(capsys)["error"] == "panel_error"


def test_unknown_config_key(tmp_path, capsys):
    path = tmp_path / "typo.yaml"
    path.write_text(yaml.safe_dump({"rolling": {"windw": 10}}), encoding="utf-8")
    assert main(["build-indexes", "--config", str(path)]) == EXIT_DOMAIN_ERROR
    record = error_record(capsys)
    assert record["error"] == "config_error"
    assert record["details"]["key"] == "rolling.windw"


def test_predict_without_targets_writes_empty_tables(small_dataset):
    config, output = small_dataset
    with open(config, encoding="utf-8") as file:
        data = yaml.safe_load(file)
    data["predictive"]["macro_targets"] = []
    data["predictive"]["uncertainty_targets"] = []
    with open(config, "w", encoding="utf-8") as file:
        yaml.safe_dump(data, file)
    assert main(["predict", "--config", config]) == EXIT_OK
    long = pd.read_csv(os.path.join(output, "predict_macro_long.csv"), comment="#")
    assert long.empty


def test_gen_fixture_command(tmp_path, capsys):
    out = tmp_path / "daten"
    assert main(["gen-fixture", "--output", str(out), "--days", "40", "--names", "X", "Y"]) == EXIT_OK
    printed = capsys.readouterr().out.split()
    assert {os.path.basename(p) for p in printed} == {
        "chains.csv", "rates.csv", "caps.csv", "indicators.csv", "fearconnect_config.yaml"}
    assert sorted(pd.read_csv(out / "caps.csv")["name"]) == ["X", "Y"]


def test_seed_belongs_to_gen_fixture(tmp_path):
    runs = []
    for name in ("erster", "zweiter"):
        assert main(["gen-fixture", "--output", str(tmp_path / name), "--days", "20", "--seed", "7"]) == EXIT_OK
        runs.append(snapshot(str(tmp_path / name)))
    assert runs[0] == runs[1]
    with pytest.raises(SystemExit) as info:
        main(["build-indexes", "--seed", "7"])
    assert info.value.code == 2


def test_help_lists_every_config_key(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--help"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    for key in flatten_keys():
        assert key in out


@pytest.fixture(scope="module")
def default_run(tmp_path_factory):
    quiet = {"runtime": {"threads": 2}, "logging": {"console_logging": False}}
    config, output = make_dataset(tmp_path_factory.mktemp("standard"), n_days=1000, overrides=quiet)
    return config, output, run_flow(config)


def test_default_settings_run_cleanly(default_run):
    config, output, codes = default_run
    assert codes == [EXIT_OK] * 4
    with open(config, encoding="utf-8") as file:
        data = yaml.safe_load(file)
    assert (data["connectedness"]["lags"], data["connectedness"]["horizon"]) == (4, 12)
    assert data["rolling"]["window"] == 200

    with open(os.path.join(output, "gap_report.json"), encoding="utf-8") as file:
        gaps = json.load(file)["gaps"]
    assert gaps["n_filled"] / (gaps["n_dates"] * 3) < 0.05
    assert len(gaps["dropped_leading_dates"]) < 5


def test_default_settings_give_estimated_cells(default_run):
    _, output, _ = default_run
    long = pd.read_csv(os.path.join(output, "predict_macro_long.csv"), comment="#")
    ads = long[long["target"] == "ADS"]
    assert (ads["status"] == "ok").any()
    assert (ads.loc[ads["horizon"] == 1, "status"] == "ok").any()
