"""Smoke test for the `wkb` extension module.

Build and install first:  pip install --no-build-isolation ./crates/py
Run:                      python python/smoke_test.py
"""

import cmath
import json
import math
import pathlib
import tempfile

import wkb


def check_series():
    grid = wkb.Grid(-0.4, 0.4, 81, 0.2, 41)
    phase = wkb.Phase(grid, "harmonic", beta=1.0)
    assert phase.hj_residual() <= 1e-10

    amps = wkb.solve(phase, grid, 2)
    assert [a.order for a in amps] == [0, 1, 2]
    values = amps[0].values()
    assert len(values) == 81 and len(values[0]) == 41

    report = wkb.order_sweep(phase, amps, [0.2, 0.1, 0.05, 0.025])
    assert abs(report.slope - 4.0) < 0.1, report.slope
    assert max(report.identity_errors) <= 1e-6

    psi = wkb.psi(phase, amps[:1], 0.05)
    # |Psi| = |a_0| when N = 0
    assert abs(abs(psi[10][5]) - abs(values[10][5])) < 1e-14


def check_plane_wave():
    grid = wkb.Grid(-0.2, 0.2, 21, 0.1, 11)
    phase = wkb.Phase(grid, "free", beta=0.5)
    amps = wkb.solve(phase, grid, 0, profile_name="constant")
    report = wkb.order_sweep(phase, amps, [0.1, 0.05, 0.025])
    assert report.slope is None
    assert report.residual_rms == [0.0, 0.0, 0.0]


def check_berry():
    theta = math.pi / 2
    loop = wkb.two_level_loop(theta, 2000)
    gamma = wkb.berry_phase(loop)
    expected = -math.pi * (1 - math.cos(theta))
    diff = cmath.phase(cmath.exp(1j * (gamma - expected)))
    assert abs(diff) <= 1e-3, (gamma, expected)
    assert wkb.berry_phase([[1, 0]] * 8) == 0.0


def check_runner():
    config = {
        "kind": "sweep",
        "potential": {"family": "harmonic"},
        "beta": 1.0,
        "grid": {"x_lo": -0.3, "x_hi": 0.3, "nx": 41, "t_hi": 0.1, "nt": 21},
        "order": 1,
        "hbar": [0.1, 0.05, 0.025],
    }
    with tempfile.TemporaryDirectory() as tmp:
        out = pathlib.Path(tmp) / "run"
        assert wkb.run_config(json.dumps(config), str(out)) == 0
        assert (out / "report.json").is_file()
        print("  check:", wkb.check(str(out)))

    try:
        wkb.run_config(json.dumps({"kind": "sweep", "order": 9}), "unused")
    except ValueError as err:
        assert "order" in str(err)
    else:
        raise AssertionError("invalid config was accepted")


if __name__ == "__main__":
    for test in (check_series, check_plane_wave, check_berry, check_runner):
        test()
        print(f"ok {test.__name__}")
    print(f"wkb {wkb.__version__}: smoke test passed")
