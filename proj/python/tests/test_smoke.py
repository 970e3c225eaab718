import math

import pytest

import ssrcusum


def test_scores():
    assert ssrcusum.xi_location("w", 2, -1, 2) == pytest.approx(-2 * math.sqrt(6 / 15))
    assert ssrcusum.xi_dispersion(2, 2) == pytest.approx(0.6)
    assert ssrcusum.inverse_normal_cdf(0.975) == pytest.approx(1.959964, abs=1e-6)
    with pytest.raises(ValueError):
        ssrcusum.xi_location("w", 3, 1, 4)


def test_ranks():
    acc = ssrcusum.RankAccumulator()
    out = [acc.push(x) for x in (0.5, -1.2, 0.8)]
    assert out[-1] == (1, 2, 3)
    assert len(acc) == 3


def test_theta():
    assert ssrcusum.theta0("w", "normal") == pytest.approx(math.sqrt(3 / math.pi), rel=1e-7)
    assert ssrcusum.theta0("vdw", "normal") == pytest.approx(1.0, rel=1e-7)
    assert round(ssrcusum.theta1("normal"), 2) == 1.10


def test_ic_arl_and_calibration():
    est = ssrcusum.estimate_ic_arl("w", 0.5, 2.73, replications=20000, seed=3)
    assert abs(est["arl"] - 100) < 4 * est["standard_error"] + 3
    result = ssrcusum.calibrate("w", [0.5], [100], replications=2000, verification_replications=4000, seed=1)
    assert result["h"][0][0] == pytest.approx(2.73, rel=0.04)


def test_ooc():
    est = ssrcusum.ooc_arl("normal", "w", 1.0, 50, 0.25, 7.25, replications=2000)
    oracle = ssrcusum.normal_oracle_arl(0.9772, 50, 0.25, 7.25, replications=2000)
    assert abs(est["arl"] - oracle["arl"]) < 2


def test_monitor_and_cli():
    config = {"location": {"score": "w", "zeta": 0.25, "h": 2.0, "sides": "both"}}
    records = ssrcusum.monitor([1.0] * 10, config)
    assert records[-1]["signals"][0]["chart"] == "location"
    assert len(records) < 10

    code, out, _ = ssrcusum.run_cli(["monitor", "--zeta", "0.1", "--h", "5"], "3.0,2.5\n")
    assert code == 0
    assert "observations\t1" in out
    code, _, err = ssrcusum.run_cli(["monitor", "--zeta", "0.1"], "1\n")
    assert code == 1 and err


def test_phase1():
    import random

    rng = random.Random(1)
    data = [rng.gauss(0, 2) for _ in range(2000)]
    design = ssrcusum.design_from_phase1(data, target_shift=0.5)
    assert design["sigma_hat"] == pytest.approx(2, rel=0.05)
    assert design["zeta"] == pytest.approx(design["theta0_hat"] * 0.25)
