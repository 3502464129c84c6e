import numpy as np
import pytest

import hexftc


def test_scenarios_listed():
    names = [n for n, _ in hexftc.scenarios()]
    assert names[:4] == ["default", "nominal", "calm", "hover"]


def test_hover_run_has_telemetry():
    r = hexftc.run("hover")
    assert r["outcome"] == "NOMINAL"
    tel = r["telemetry"]
    assert len(tel["t"]) == r["ticks"] == 1001  # includes t = 0
    assert max(tel["pos_err"]) < 1e-3


def test_toml_document_and_failure():
    r = hexftc.run('base = "calm"\nduration = 13.0\n', toml=True)
    assert r["outcome"] == "RECOVERED"
    assert r["selected"] == 4
    assert r["t_switch"] > r["t_detect"] >= 10.0


def test_bad_config_raises():
    with pytest.raises(ValueError, match="config not found"):
        hexftc.run("/no/such.toml")
    with pytest.raises(hexftc.ConfigError):
        hexftc.run("duration = -2\n", toml=True)


def test_allocate_matches_lstsq_when_interior():
    b = hexftc.mixer_matrix()
    u = np.array([14.0, 0.1, -0.1, 0.02])
    f, iters, converged, kkt = hexftc.allocate(b, u, -np.full(6, 1e3), np.full(6, 1e3), np.ones(4), 1e6)
    assert converged and kkt < 1e-8
    ref = np.linalg.lstsq(b, u, rcond=None)[0]
    assert np.allclose(f, ref, atol=1e-3)


def test_mix_and_ranks():
    w = hexftc.mix(14.715, [0.0, 0.0, 0.0], 4)
    assert w[3] == 0.0
    assert [hexftc.controllability_rank(i) for i in range(7)] == [6] * 7
    assert all(hexftc.controllability_rank(i, paired=True) < 6 for i in range(1, 7))
    assert hexftc.select_model([3, 1, 2, 5, 4, 6]) == 2


def test_lyapunov():
    a = np.array([[0.0, 1.0], [-2.0, -3.0]])
    p = hexftc.solve_lyapunov(a)
    assert np.allclose(p @ a + a.T @ p, -np.eye(2), atol=1e-12)
