import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from heatplan.cli import main

from conftest import REPO, SCENARIO


@pytest.fixture(scope="module")
def pair_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("pair")
    code = main(["run", str(SCENARIO), str(out), "--mode", "pair", "--export-mps"])
    assert code == 0
    return out


BUNDLE = ["capacity_expansion.csv", "storage.csv", "costs.csv",
          "dispatch.csv", "audit.json", "manifest.json"]


def test_pair_writes_six_files_per_variant(pair_run):
    for variant in ("homogeneous", "heterogeneous"):
        for name in BUNDLE:
            assert (pair_run / variant / name).exists(), name
        assert (pair_run / variant / "model.mps").exists()
    assert (pair_run / "diff.json").exists()


def test_audit_residuals_within_tolerance(pair_run):
    for variant in ("homogeneous", "heterogeneous"):
        payload = json.loads((pair_run / variant / "audit.json").read_text())
        assert payload["ok"] is True
        assert payload["max_residual"] <= 1e-6


def test_manifest_carries_digests_and_solver_stats(pair_run):
    payload = json.loads((pair_run / "homogeneous" / "manifest.json").read_text())
    assert payload["toolkit_version"]
    assert payload["inputs_sha256"]
    assert all(len(v) == 64 for v in payload["inputs_sha256"].values())
    stats = payload["solver"]["homogeneous"]
    assert stats["status"] == "Optimal"
    assert stats["iterations"] > 0
    assert len(payload["weeks"]) == 2


def test_csv_values_recomputable_from_dispatch(pair_run):
    import csv

    variant = pair_run / "heterogeneous"
    with open(variant / "dispatch.csv") as fh:
        rows = list(csv.DictReader(fh))
    storage_rows = {r["entity"]: float(r["value"]) for r in rows
                    if r["variable"] == "storage_energy"}
    with open(variant / "storage.csv") as fh:
        for row in csv.DictReader(fh):
            assert storage_rows[row["bus"]] == float(row["energy_gwh"])
    cap_rows = {r["entity"]: float(r["value"]) for r in rows
                if r["variable"] == "new_capacity"}
    with open(variant / "capacity_expansion.csv") as fh:
        for row in csv.DictReader(fh):
            assert cap_rows[f"{row['tech']}@{row['bus']}"] == float(row["new_gw"])


def test_rerun_is_byte_identical(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert main(["run", str(SCENARIO), str(out1), "--mode", "homo"]) == 0
    assert main(["run", str(SCENARIO), str(out2), "--mode", "homo"]) == 0
    for name in BUNDLE:
        if name == "manifest.json":  # wall clock lives here; compare the rest
            continue
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


def test_missing_file_exit_code(tmp_path, capsys):
    broken_dir = tmp_path / "scenarios"
    shutil.copytree(SCENARIO.parent, broken_dir)
    shutil.copytree(REPO / "data", tmp_path / "data")
    (tmp_path / "data" / "temp_london.csv").unlink()
    code = main(["run", str(broken_dir / "paper_baseline.toml"), str(tmp_path / "out")])
    assert code == 3
    err = capsys.readouterr().err
    assert "temp_london.csv" in err


def test_infeasible_exit_code(tmp_path, capsys):
    scen_dir = tmp_path / "scenarios"
    shutil.copytree(SCENARIO.parent, scen_dir)
    shutil.copytree(REPO / "data", tmp_path / "data")
    network = (scen_dir / "network_3bus.toml").read_text()
    # strangle every line and forbid new builds so demand cannot be met
    network = network.replace("thermal_limit_gw = 5.0", "thermal_limit_gw = 0.001")
    (scen_dir / "network_3bus.toml").write_text(network)
    scenario = (scen_dir / "paper_baseline.toml").read_text()
    scenario = scenario.replace("[[generators]]\nname = \"ccgt\"",
                                "[[generators]]\nname = \"ccgt\"\nexpandable = false")
    scenario = scenario.replace("[[generators]]\nname = \"wind\"",
                                "[[generators]]\nname = \"wind\"\nexpandable = false")
    scenario = scenario.replace("[[generators]]\nname = \"solar\"",
                                "[[generators]]\nname = \"solar\"\nexpandable = false")
    scenario = scenario.replace("energy_capital_cost_per_gwh = 1.5e8",
                                "energy_capital_cost_per_gwh = 1.5e18")
    (scen_dir / "paper_baseline.toml").write_text(scenario)
    code = main(["run", str(scen_dir / "paper_baseline.toml"),
                 str(tmp_path / "out"), "--mode", "homo"])
    assert code == 2
    assert "Infeasible" in capsys.readouterr().err


def test_demand_command_outputs(tmp_path):
    out = tmp_path / "demand"
    assert main(["demand", str(SCENARIO), str(out)]) == 0
    summary = (out / "demand_summary.csv").read_text().splitlines()
    assert summary[0] == "mode,bus,peak_gw,average_gw"
    records = {}
    for line in summary[1:]:
        mode, bus, peak, avg = line.split(",")
        records[(mode, bus)] = (float(peak), float(avg))
    # the cold inland bus peaks higher with local heating
    assert records[("heterogeneous", "manchester")][0] >= \
        records[("homogeneous", "manchester")][0]

    import csv
    with open(out / "demand_heterogeneous.csv") as fh:
        rows = list(csv.DictReader(fh))
    series = np.array([float(r["manchester"]) for r in rows])
    peak, avg = records[("heterogeneous", "manchester")]
    assert peak == pytest.approx(series.max())
    assert avg == pytest.approx(series.mean())


def test_zero_heat_scenario_collapses_modes(tmp_path):
    scen_dir = tmp_path / "scenarios"
    shutil.copytree(SCENARIO.parent, scen_dir)
    shutil.copytree(REPO / "data", tmp_path / "data")
    scenario = (scen_dir / "paper_baseline.toml").read_text()
    scenario = scenario.replace("penetration = 1.0", "penetration = 0.0")
    (scen_dir / "paper_baseline.toml").write_text(scenario)
    out = tmp_path / "out"
    assert main(["demand", str(scen_dir / "paper_baseline.toml"), str(out)]) == 0
    homo = (out / "demand_homogeneous.csv").read_bytes()
    het = (out / "demand_heterogeneous.csv").read_bytes()
    assert homo == het


def test_validate_command(capsys):
    assert main(["validate", str(SCENARIO)]) == 0
    captured = capsys.readouterr().out
    assert "OK" in captured
    assert "stress hour" in captured
    assert "demand-minus-wind max" in captured


def test_unknown_budget_label_is_input_error(capsys):
    assert main(["validate", str(SCENARIO), "--budget", "nope"]) == 3
    assert "budget" in capsys.readouterr().err
