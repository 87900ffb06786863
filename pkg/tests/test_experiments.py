import csv
import json

import numpy as np
import pytest

from hjint.errors import ConfigError
from hjint.experiments import (
    SUMMARY_COLUMNS,
    drift_ratio,
    fit_slope,
    load_config,
    parse_config,
    run_convergence,
    run_drift,
    run_single,
    run_trajectory,
)

BASE = {"system": "rigid_body", "order_k": 2, "step_h": 0.05, "t_final": 1.0}


def cfg(**kw):
    return parse_config({**BASE, **kw})


def test_fit_slope_exact_power_law():
    hs = [0.1, 0.05, 0.025, 0.0125]
    slope, resid = fit_slope(hs, [3.0 * h**2 for h in hs])
    assert slope == pytest.approx(2.0, abs=1e-12)
    assert resid < 1e-12


def test_fit_slope_reports_scatter():
    hs = [0.1, 0.05, 0.025, 0.0125]
    slope, resid = fit_slope(hs, [h**2 * f for h, f in zip(hs, (1.0, 3.0, 1.0, 3.0))])
    assert resid > 0.1
    with pytest.raises(ValueError):
        fit_slope([0.1], [1.0])
    with pytest.raises(ValueError):
        fit_slope([0.1, 0.05], [1.0, 0.0])


def test_drift_ratio():
    t = np.linspace(0, 100, 1001)
    assert drift_ratio(1.0 + 1e-3 * np.sin(t)) == pytest.approx(1.0, abs=0.05)
    assert drift_ratio(1.0 + 1e-3 * t) == pytest.approx(2.0, abs=0.05)
    assert drift_ratio(np.ones(10)) == 1.0


@pytest.mark.parametrize(
    "bad, field",
    [
        ({"system": "pendulum"}, "system"),
        ({"order_k": 0}, "order_k"),
        ({"order_k": 2.5}, "order_k"),
        ({"step_h": -0.1}, "step_h"),
        ({"step_h": "big"}, "step_h"),
        ({"t_final": -1.0}, "t_final"),
        ({"method": "rk4"}, "method"),
        ({"chart": "so4"}, "chart"),
        ({"chart": "pair"}, "chart"),
        ({"newton_tol": 0.0}, "newton_tol"),
        ({"newton_max_iter": 0}, "newton_max_iter"),
        ({"p_degree": 3}, "p_degree"),
        ({"initial_state": [1.0, 2.0]}, "initial_state"),
        ({"params": {"mass": 1.0}}, "params"),
        ({"outputs": {"plot": "x.png"}}, "outputs"),
        ({"method": "split", "system": "heavy_top"}, "method"),
        ({"split_scheme": "ruth"}, "split_scheme"),
        ({"reference_tol": 1e-20}, "reference_tol"),
    ],
)
def test_invalid_fields_are_named(bad, field):
    with pytest.raises(ConfigError, match=repr(field)):
        parse_config({**BASE, **bad})


def test_unknown_and_missing_fields():
    with pytest.raises(ConfigError, match="order_kk"):
        parse_config({**BASE, "order_kk": 3})
    doc = dict(BASE)
    del doc["step_h"]
    with pytest.raises(ConfigError, match="step_h"):
        parse_config(doc)
    with pytest.raises(ConfigError):
        parse_config([1, 2])


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.json")
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(p)


def test_outputs_resolve_against_config_dir(tmp_path):
    p = tmp_path / "run.json"
    p.write_text(json.dumps({**BASE, "outputs": {"summary_csv": "out/s.csv"}}))
    c = load_config(p)
    assert c.outputs["summary_csv"] == str(tmp_path / "out" / "s.csv")


def test_zero_time_gives_empty_summary(tmp_path):
    c = parse_config({**BASE, "t_final": 0.0, "outputs": {"summary_csv": "s.csv", "trajectory_csv": "t.csv"}},
                     tmp_path)
    s = run_single(c)
    assert s.n_steps == 0 and s.global_error == 0.0
    rows = list(csv.DictReader(open(tmp_path / "s.csv")))
    assert rows[0]["n_steps"] == "0"
    traj = list(csv.reader(open(tmp_path / "t.csv")))
    assert len(traj) == 2


def test_trajectory_csv_layout(tmp_path):
    c = parse_config({**BASE, "outputs": {"trajectory_csv": "t.csv"}}, tmp_path)
    run_single(c, with_error=False)
    rows = list(csv.reader(open(tmp_path / "t.csv")))
    assert rows[0] == ["step", "t", "coord_0", "coord_1", "coord_2", "energy", "casimir_0", "newton_iters"]
    assert len(rows) == 22
    assert rows[1][0] == "0" and rows[-1][0] == "20"
    # 17 significant digits round-trip exactly
    assert float(rows[1][2]) == 1.5
    assert len(rows[5][2].lstrip("-").replace(".", "").replace("e", "").lstrip("0")) >= 15


def test_csv_output_is_deterministic(tmp_path):
    outs = []
    for i in range(2):
        c = parse_config({**BASE, "outputs": {"trajectory_csv": f"t{i}.csv", "summary_csv": f"s{i}.csv"}}, tmp_path)
        run_single(c)
        outs.append(((tmp_path / f"t{i}.csv").read_bytes(), (tmp_path / f"s{i}.csv").read_bytes()))
    assert outs[0] == outs[1]


def test_summary_columns(tmp_path):
    c = parse_config({**BASE, "outputs": {"summary_csv": "s.csv"}}, tmp_path)
    s = run_single(c)
    header = next(csv.reader(open(tmp_path / "s.csv")))
    assert tuple(header) == SUMMARY_COLUMNS
    assert 0 < s.global_error < 1e-2
    assert s.max_casimir_deviation <= 1e-12


def test_split_method_trajectory():
    rec = run_trajectory(cfg(method="split", split_scheme="strang"))
    n2 = np.sum(rec.coords**2, axis=1)
    assert np.max(np.abs(n2 - n2[0])) <= 1e-13
    assert len(rec) == 21


def test_convergence_sweep_serial_and_parallel_agree(tmp_path):
    c = parse_config({**BASE, "t_final": 1.0, "outputs": {"summary_csv": "conv.csv"}}, tmp_path)
    hs = [0.1, 0.05, 0.025]
    a = run_convergence(c, [2], hs, jobs=1)
    b = run_convergence(c, [2], hs, jobs=2)
    assert [r.row() for r in a] == [r.row() for r in b]
    assert a[0].fitted_slope == pytest.approx(2.0, abs=0.3)
    assert len(list(csv.reader(open(tmp_path / "conv.csv")))) == 4


def test_convergence_rejects_low_p_degree():
    with pytest.raises(ConfigError, match="p_degree"):
        run_convergence(cfg(p_degree=4), [2, 4], [0.1])


def test_drift_run_overrides_time():
    s = run_drift(cfg(), t_final=2.0)
    assert s.n_steps == 40
    assert s.global_error == 0.0
