import math

import numpy as np
import pytest
from click.testing import CliRunner

from staggered_rd import cli
from staggered_rd.cli import (
    EXIT_BLOWUP,
    EXIT_CONFIG,
    EXIT_POSITIVITY,
    RunConfig,
    convergence_study,
    fitted_order,
    main,
    observed_orders,
    parse_config,
    parse_config_text,
    run_case,
    stability_run,
)
from staggered_rd.diagnostics import read_csv
from staggered_rd.errors import BlowUpError, ConfigError


def test_parse_valid_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("case = sod\nn_cells = 1000\ncfl = 0.4\n")
    cfg = parse_config(path)
    assert (cfg.case, cfg.n_cells, cfg.cfl) == ("sod", 1000, 0.4)


def test_parse_comments_and_blank_lines():
    values = parse_config_text("# a comment\n\nflux = exact   # trailing\ncorrection = off\n")
    assert values == {"flux": "exact", "correction": False}


@pytest.mark.parametrize("text,key", [
    ("flux = upwind", "flux"),
    ("colour = red", "colour"),
    ("n_cells = many", "n_cells"),
    ("cfl = -1", "cfl"),
    ("r = 3", "r"),
    ("case = nowhere", "case"),
    ("correction = maybe", "correction"),
])
def test_parse_errors_name_the_key(tmp_path, text, key):
    path = tmp_path / "bad.cfg"
    path.write_text(text + "\n")
    with pytest.raises(ConfigError) as err:
        parse_config(path)
    assert err.value.key == key
    assert key in str(err.value)


def test_malformed_line_is_rejected():
    with pytest.raises(ConfigError):
        parse_config_text("just words\n")


def test_flags_override_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("correction = on\nn_cells = 10\n")
    cfg = parse_config(path, {"correction": "off", "n_cells": None})
    assert cfg.correction is False and cfg.n_cells == 10


def test_equal_degree_is_gated():
    with pytest.raises(ConfigError):
        RunConfig(r=1, kin_degree=1).validate()
    assert RunConfig(r=1, kin_degree=1, allow_equal_degree=True).validate().label == "K1T1"
    assert RunConfig(r=1).label == "K2T1"


def test_run_case_writes_outputs(tmp_path):
    cfg = RunConfig(case="sod", n_cells=50, profile=str(tmp_path / "p.csv"), series=str(tmp_path / "s.csv"),
                    summary=str(tmp_path / "sum.csv"), corrections=str(tmp_path / "c.csv"))
    summary, result = run_case(cfg)
    assert result.t == pytest.approx(0.16)
    assert summary.l1["rho"] < 0.05
    assert summary.max_residue_m <= 1e-12 and summary.max_residue_e <= 1e-12
    _, prof = read_csv(tmp_path / "p.csv")
    assert prof.shape == (1000, 5)
    _, series = read_csv(tmp_path / "s.csv")
    assert series.shape[0] == result.steps + 1
    keys = dict(line.split(",", 1) for line in (tmp_path / "sum.csv").read_text().splitlines()[1:])
    for k in ("l1_rho", "drift_momentum", "drift_energy", "weak_bv_u", "layout", "shock_position_error"):
        assert k in keys
    _, corr = read_csv(tmp_path / "c.csv")
    assert corr.shape == (50 * result.steps, 6)


def test_summary_is_reproducible(tmp_path):
    path = tmp_path / "s.csv"
    cfg = RunConfig(case="sod", n_cells=40, summary=str(path))
    run_case(cfg)
    first = path.read_bytes()
    run_case(cfg)
    assert path.read_bytes() == first


def test_uncorrected_sod_is_flagged():
    summary, _ = run_case(RunConfig(case="sod", n_cells=200, correction=False))
    assert summary.shock_flag and summary.shock_error > 0.02
    good, _ = run_case(RunConfig(case="sod", n_cells=200))
    assert not good.shock_flag


def test_123_with_procedure_2_stays_positive():
    summary, _ = run_case(RunConfig(case="123", n_cells=200, blending="proc2"))
    assert summary.min_rho > 0 and summary.min_p > 0


def test_orders():
    assert observed_orders([4.0, 1.0, 0.25]) == pytest.approx([2.0, 2.0])
    assert fitted_order([10, 20, 40], [1.0, 0.5, 0.25]) == pytest.approx(1.0)


def test_convergence_study_k1t0_llf():
    rows = convergence_study(RunConfig(case="smooth", r=0, stabilization="llf"), (50, 100, 200, 400))
    order = fitted_order([r["n"] for r in rows], [r["l1_rho"] for r in rows])
    assert 0.6 <= order <= 1.3
    assert math.isnan(rows[0]["order_rho"])


def test_stability_examples():
    assert stability_run("hllc", "K1T0")["outcome"] == "stable"
    assert stability_run("exact", "K2T1")["outcome"] == "stable"
    blow = stability_run("centered", "K1T1")
    assert blow["outcome"] == "blowup" and int(blow["step"]) > 0 and float(blow["t"]) > 0


# -- command line ---------------------------------------------------------------------------


def test_cli_run_success(tmp_path):
    res = CliRunner().invoke(main, ["run", "--case", "sod", "--n-cells", "40", "--summary", str(tmp_path / "s.csv")])
    assert res.exit_code == 0, res.output
    assert "l1_rho" in res.output
    assert (tmp_path / "s.csv").exists()


def test_cli_config_error_exit_code(tmp_path):
    res = CliRunner().invoke(main, ["run", "--flux", "upwind"])
    assert res.exit_code == EXIT_CONFIG
    assert "flux" in res.output
    cfg = tmp_path / "c.cfg"
    cfg.write_text("correction = on\nbogus = 1\n")
    assert CliRunner().invoke(main, ["run", "--config", str(cfg)]).exit_code == EXIT_CONFIG


def test_cli_flag_overrides_config_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("case = sod\nn_cells = 40\ncorrection = on\n")
    res = CliRunner().invoke(main, ["run", "--config", str(cfg), "--correction", "off"])
    assert res.exit_code == 0
    assert "correction = False" in res.output


def test_cli_positivity_exit_code():
    # quadratic velocity without limiting cannot keep the strong shock positive
    res = CliRunner().invoke(main, ["run", "--case", "strong", "--n-cells", "100", "--r", "1"])
    assert res.exit_code == EXIT_POSITIVITY
    assert "step" in res.output


def test_cli_blowup_exit_code(monkeypatch):
    def boom(cfg):
        raise BlowUpError("non-finite degrees of freedom", step=7, time=0.01)

    monkeypatch.setattr(cli, "run_case", boom)
    res = CliRunner().invoke(main, ["run"])
    assert res.exit_code == EXIT_BLOWUP


def test_cli_converge_and_cases(tmp_path):
    out = tmp_path / "conv.csv"
    res = CliRunner().invoke(main, ["converge", "--meshes", "50,100", "--output", str(out)])
    assert res.exit_code == 0, res.output
    assert "fitted order" in res.output
    header, data = read_csv(out)
    assert header[0] == "n" and data.shape[0] == 2
    assert CliRunner().invoke(main, ["converge", "--meshes", "a,b"]).exit_code == EXIT_CONFIG
    res = CliRunner().invoke(main, ["cases"])
    assert res.exit_code == 0 and "severe" in res.output


def test_cli_stability_command(tmp_path):
    out = tmp_path / "stab.csv"
    res = CliRunner().invoke(main, ["stability", "--n-cells", "50", "--output", str(out)])
    assert res.exit_code == 0, res.output
    lines = out.read_text().splitlines()
    assert lines[0] == "flux,layout,outcome,step,t,growth" and len(lines) == 10
