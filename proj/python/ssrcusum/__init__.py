"""Signed sequential rank CUSUM charts."""

import json

from ._core import (
    ConfigError,
    ConvergenceError,
    DomainError,
    InputError,
    KindMismatch,
    Monitor,
    RankAccumulator,
    SimulationError,
    design_from_phase1,
    estimate_ic_arl,
    inverse_normal_cdf,
    normal_oracle_arl,
    ooc_arl,
    run_cli,
    theta0,
    theta1,
    xi_dispersion,
    xi_location,
)
from ._core import calibrate_json as _calibrate_json


def calibrate(score, zetas, arl0s, **options):
    """Control limits for each (zeta, ARL0) pair, as a dict of zeta-by-ARL0 grids."""
    return json.loads(_calibrate_json(score, list(zetas), list(arl0s), **options))


def monitor(values, config):
    """Run a Monitor over values; config is a dict in the CLI's JSON shape."""
    m = Monitor(json.dumps(config))
    records = []
    for x in values:
        records.append(m.push(float(x)))
        if m.halted:
            break
    return records


__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "InputError",
    "KindMismatch",
    "Monitor",
    "RankAccumulator",
    "SimulationError",
    "calibrate",
    "design_from_phase1",
    "estimate_ic_arl",
    "inverse_normal_cdf",
    "monitor",
    "normal_oracle_arl",
    "ooc_arl",
    "run_cli",
    "theta0",
    "theta1",
    "xi_dispersion",
    "xi_location",
]
