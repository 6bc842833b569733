import copy
import json
import logging
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from gasflow_backstepping import cli
from gasflow_backstepping.errors import InfeasibleEquilibriumError, ValidationError
from gasflow_backstepping.exosystem import PAPER_IV_PERIOD
from gasflow_backstepping.scenario import (
    PRESETS,
    load_scenario,
    preset,
    scenario_from_dict,
    scenario_to_dict,
)

OMEGA = 2 * math.pi / PAPER_IV_PERIOD


def base_doc(**changes):
    doc = {
        "schema_version": 1,
        "name": "unit",
        "params": {"lambda_f": 0.011, "D": 0.5, "ell": 25000, "sigma": 378, "phi_L": 289, "U_star": 46},
        "exosystem": {"A": [[0, 1], [-(OMEGA**2), 0]], "C": [1, 0], "X0": [0, 0.1 * 289 / 3600]},
        "controller": "known-exo",
        "plant": "linear",
        "N": 64,
        "horizon": 120,
    }
    doc.update(changes)
    return doc


def write_json(tmp_path, doc, name="sc.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc, indent=2))
    return str(path)


@pytest.mark.parametrize("name", PRESETS)
def test_preset_fidelity(name):
    sc = preset(name)
    p = sc.params
    assert (p.lambda_f, p.D, p.ell, p.sigma, p.phi_L, p.U_star) == (0.011, 0.5, 25000.0, 378.0, 289.0, 46.0)
    np.testing.assert_allclose(sc.exo.A, [[0, 1], [-(OMEGA**2), 0]], rtol=1e-15)
    np.testing.assert_array_equal(sc.exo.C, [1.0, 0.0])
    assert sc.exo.X0[1] == pytest.approx(8.0277777777e-3, rel=1e-9)
    assert sc.N == 250 and sc.horizon == 43200.0 and sc.plant == "nonlinear"
    assert sc.observer_init == "zero"
    assert sc.transient_time == pytest.approx(3 * 25000 / 378 + 10)
    closed = name.endswith("closed")
    case_b = "-b-" in name
    assert sc.uncertainty.kind == ("cubic-of-s" if case_b else "none")
    assert sc.controller == ("off" if not closed else "uncertain" if case_b else "known-exo")


def test_unknown_preset():
    with pytest.raises(ValidationError):
        load_scenario("paper-iv-c")


def test_missing_horizon_names_field():
    doc = base_doc()
    del doc["horizon"]
    with pytest.raises(ValidationError) as exc:
        scenario_from_dict(doc)
    assert exc.value.field == "horizon"


@pytest.mark.parametrize(
    "key,value,field",
    [
        ("controller", "pid", "controller"),
        ("plant", "quantum", "plant"),
        ("N", 8, "N"),
        ("horizon", -5, "horizon"),
        ("dt", 10.0, "dt"),
        ("schema_version", 2, "schema_version"),
        ("kernel_rule", "simpson", "kernel_rule"),
        ("H_poles", [-1.0], "H_poles"),
    ],
)
def test_invalid_fields(key, value, field):
    with pytest.raises(ValidationError) as exc:
        scenario_from_dict(base_doc(**{key: value}))
    assert exc.value.field == field


def test_infeasible_equilibrium():
    doc = base_doc()
    doc["params"]["U_star"] = 10
    with pytest.raises(InfeasibleEquilibriumError):
        scenario_from_dict(doc)


def test_json_error_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "params": {},\n  "N": 64,,\n}\n')
    with pytest.raises(ValidationError) as exc:
        load_scenario(str(path))
    assert exc.value.line == 3


def test_dict_round_trip(tmp_path):
    doc = base_doc(
        controller="uncertain",
        H_poles=[[-0.001, 0.0005], [-0.001, -0.0005]],
        uncertainty={"kind": "custom-samples", "M": 3.0, "times": [0, 60], "values": [1, -1]},
        saturation=0.4,
    )
    sc = scenario_from_dict(doc)
    again = scenario_from_dict(json.loads(json.dumps(scenario_to_dict(sc))))
    assert scenario_to_dict(again) == scenario_to_dict(sc)
    assert sc.H_poles == (complex(-0.001, 0.0005), complex(-0.001, -0.0005))


def test_plant_alias():
    assert scenario_from_dict(base_doc(plant="linear-canonical")).plant == "linear"


def test_large_disturbance_warns(caplog):
    doc = base_doc(horizon=21600)
    doc["exosystem"]["X0"] = [0, 0.5 * 289 / 3600]
    with caplog.at_level(logging.WARNING):
        scenario_from_dict(doc)
    assert any("phi_L" in r.getMessage() for r in caplog.records)
    caplog.clear()
    with caplog.at_level(logging.WARNING):
        scenario_from_dict(base_doc(horizon=21600))
    assert not caplog.records


def test_cli_validate(capsys, tmp_path):
    assert cli.main(["validate", "paper-iv-b-closed"]) == 0
    assert "paper-iv-b-closed: ok" in capsys.readouterr().out
    doc = base_doc()
    doc["params"]["U_star"] = 10
    assert cli.main(["validate", write_json(tmp_path, doc)]) == 2
    assert "invalid input" in capsys.readouterr().err


def test_cli_missing_field_exit_code(capsys, tmp_path):
    doc = base_doc()
    del doc["N"]
    assert cli.main(["run", write_json(tmp_path, doc), "--out", str(tmp_path / "o")]) == 2
    assert "[N]" in capsys.readouterr().err


def test_cli_run_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    rc = cli.main(["run", write_json(tmp_path, base_doc()), "--out", str(out)])
    assert rc == 0
    assert "peak |drho(l)|" in capsys.readouterr().out
    for name in ("disturbance.svg", "density.svg", "flow.svg"):
        root = ET.parse(out / name).getroot()
        assert root.tag.endswith("svg")
        assert root.findall(".//{http://www.w3.org/2000/svg}polyline")
    summary = json.loads((out / "summary.json").read_text())
    assert summary["scenario"]["name"] == "unit"
    assert summary["steps"] > 0
    header = (out / "timeseries.csv").read_text().splitlines()[0]
    assert header.startswith("t,rho_in,rho_mid,rho_out")


def test_cli_numerical_failure_exit_code(tmp_path, capsys):
    # the nonlinear plant under the unsaturated linear design diverges within a minute
    doc = base_doc(plant="nonlinear", N=100, horizon=200, saturation=None)
    rc = cli.main(["run", write_json(tmp_path, doc), "--out", str(tmp_path / "o")])
    assert rc == 3
    assert "numerical failure" in capsys.readouterr().err
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert 0 < summary["failed_at"] < 200
    assert "t=" in summary["failure"]
    assert (tmp_path / "o" / "timeseries.csv").exists()


def test_cli_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    rc = cli.main(["run", write_json(tmp_path, base_doc()), "--out", str(blocker / "sub")])
    assert rc == 1


def test_cli_kernels_export(tmp_path, capsys):
    out = tmp_path / "k"
    assert cli.main(["kernels", write_json(tmp_path, base_doc()), "--out", str(out), "--grid", "40"]) == 0
    names = sorted(p.name for p in out.glob("*.csv"))
    assert names == sorted(f"{k}.csv" for k in ("K11", "K12", "K21", "K22", "P11", "P12", "P21", "P22"))
    report = json.loads((out / "kernels.json").read_text())
    assert report["N"] == 40
    assert all(report[f]["boundary_defect"] <= 1e-12 for f in ("K21/K22", "K11/K12", "P11/P21", "P12/P22"))
    assert "interior residual" in capsys.readouterr().out


def test_cli_overrides(tmp_path):
    out = tmp_path / "ov"
    rc = cli.main(["run", "paper-iv-a-closed", "--out", str(out), "--grid", "64", "--horizon", "300", "--plant", "linear"])
    assert rc == 0
    summary = json.loads((out / "summary.json").read_text())
    sc = summary["scenario"]
    assert (sc["N"], sc["horizon"], sc["plant"], sc["saturation"]) == (64, 300.0, "linear", None)
    assert summary["settling_time"] <= 3 * 25000 / 378 + 10


def test_cli_run_deterministic(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"d{k}"
        assert cli.main(["run", "paper-iv-b-closed", "--out", str(out), "--grid", "64", "--horizon", "600", "--plant", "linear"]) == 0
        outs.append((out / "timeseries.csv").read_bytes())
    assert outs[0] == outs[1]


def test_scenario_changes_are_validated():
    sc = preset("paper-iv-a-open")
    with pytest.raises(ValidationError):
        sc.with_changes(N=4)
    doc = copy.deepcopy(base_doc())
    doc["uncertainty"] = {"kind": "bogus"}
    with pytest.raises(ValidationError) as exc:
        scenario_from_dict(doc)
    assert exc.value.field == "uncertainty"
