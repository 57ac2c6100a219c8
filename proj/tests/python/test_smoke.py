import json
import math

import pytest

import degenwave as dw


def sine(n, mean, amp):
    return [mean + amp * math.sin(2 * math.pi * (j + 0.5) / n) for j in range(n)]


def test_piecewise_eval_and_intervals():
    f = dw.PiecewiseFunction.from_breakpoints([-1.0, 0.0, 1.0], [[-1.0], [2.0]], 1.0)
    assert f(-0.5) == 0.5
    assert dw.maximal_affine_interval(f, 0.5, -1.0, 1.0) == (0.0, 1.0)
    assert dw.PiecewiseFunction.burgers().lipschitz_on(-1.0, 1.0) == 1.0
    with pytest.raises(dw.OutOfRange):
        f(2.0)


def test_analyze_burgers():
    r = dw.analyze(dw.PiecewiseFunction.burgers(), dw.PiecewiseFunction.constant(0.0),
                   sine(32, 0.5, 0.25))
    assert r.a == r.b == r.I
    assert r.degenerate_speed


def test_transport_run_is_exact_shift():
    u0 = sine(40, 0.5, 0.25)
    params = dw.SchemeParams(t_end=0.5, cfl_safety=1.0)
    r = dw.run(dw.PiecewiseFunction.linear(2.0, 0.0), dw.PiecewiseFunction.constant(0.0), u0, params)
    assert r.final == pytest.approx(dw.shift(u0, 40), abs=1e-12)
    assert r.structure.c == 2.0


def test_band_projection_example():
    w = dw.band_project_mean([0.2, 0.8, 0.4, 0.6], [0.8] * 4, 0.0, 1.0)
    assert all(abs(x - 0.5) < 1e-15 for x in w)


def test_suite_from_config(tmp_path):
    cfg = {
        "name": "flat",
        "phi": {"burgers": {"lo": -1, "hi": 1}},
        "g": {"constant": {"lo": -1, "hi": 1, "value": 0}},
        "initial": {"sine": {"mean": 0.3, "amplitude": 0.0}},
        "grid": {"n_cells": 8},
        "scheme": {"t_end": 0.2},
        "checks": ["conservation", "decay"],
    }
    summary = json.loads(dw.run_suite(json.dumps(cfg), str(tmp_path), 1))
    assert summary["overall_pass"] is True
    assert (tmp_path / "flat" / "checks.json").exists()
    with pytest.raises(dw.SchemaError):
        dw.parse_config("{}")
