import math

import pytest

import slewshape


def test_shaper_design():
    w = slewshape.natural_frequency(0.5715)
    assert w == pytest.approx(4.143, abs=5e-4)
    imp = slewshape.design_mumzv(w, 0.5)
    period = 2 * math.pi / w
    assert [a for _, a in imp] == pytest.approx([1.0, -1.0, 1.0])
    assert imp[1][0] == pytest.approx(period / 6, abs=1e-9)
    assert imp[2][0] == pytest.approx(period / 3, abs=1e-9)
    assert slewshape.residual_vibration(imp, w) < 1e-12


def test_speed_scaling():
    assert slewshape.speed_scaling(6.6, 0.908, 4.47) == pytest.approx(32.51, rel=1e-3)


def test_config_and_fingerprint():
    cfg = slewshape.default_config()
    assert cfg["crane"]["rope_length"] == 0.5715
    assert slewshape.fingerprint(cfg) == slewshape.fingerprint({})
    with pytest.raises(ValueError, match="crane.payload_mass"):
        slewshape.fingerprint({"crane": {"payload_mass": -1}})


def test_loadchart_single_cell():
    out = slewshape.run_analysis("loadchart", {"grids": {"radius": [0.7], "boom_length": [0.9144]}})
    rows, text = out["loadchart.csv"]
    assert rows == 1
    assert text.splitlines()[1] == "R,L_b,m_max"
    assert float(text.splitlines()[2].split(",")[2]) == pytest.approx(slewshape.static_load_limit(0.7, 0.9144))


def test_trial_pair():
    scenario = {"id": "py", "crane": {"payload_mass": 0.5}}
    limit = math.radians(32.51)
    unshaped = slewshape.run_trial(scenario, 0.5 * limit, shaped=False)
    shaped = slewshape.run_trial(scenario, limit, shaped=True)
    assert unshaped["tipped"] and unshaped["outcome"] == "tipped"
    assert shaped["completed"] and not shaped["tipped"]
    assert shaped["states_csv"].startswith("time,alpha,alpha_dot")


def test_live_session():
    s = slewshape.Session({"id": "py"}, shaped=True)
    st = s.step(0.0, 0.5)
    assert st["alpha_dot"] == 0.0
    assert s.phase == "running"
    s.step(1.0, 0.6)
    assert s.commanded_rate > 0.0
    with pytest.raises(RuntimeError):
        s.metrics()
    s.abort()
    assert s.terminal and s.metrics()["completed"] is False
