"""Acceptance gate: one test per numbered criterion.

The full battery runs once per session; each test then asserts its
criterion's verdict so the report shows one pass/fail line per claim.
"""

import json

import pytest

from nlclaw.acceptance import run_criteria


@pytest.fixture(scope="session")
def battery():
    results = run_criteria()
    return {r.number: r for r in results}


def _assert(battery, number):
    r = battery[number]
    assert r.passed, f"{r.line()}\n{json.dumps(r.details, indent=2)}"


def test_criterion_01_riemann_shock_speed(battery):
    _assert(battery, 1)


def test_criterion_02_rarefaction_nonconvergence(battery):
    _assert(battery, 2)


def test_criterion_03_smooth_regime_convergence(battery):
    _assert(battery, 3)


def test_criterion_04_catastrophe_time(battery):
    _assert(battery, 4)


def test_criterion_05_structural_invariants(battery):
    _assert(battery, 5)


def test_criterion_06_general_flux_speeds(battery):
    _assert(battery, 6)


def test_criterion_07_burgers_mode_equivalence(battery):
    _assert(battery, 7)


def test_criterion_08_oracle_triangulation(battery):
    _assert(battery, 8)


def test_criterion_09_piecewise_lipschitz_increasing(battery):
    _assert(battery, 9)


def test_criterion_10_stability_envelope(battery):
    _assert(battery, 10)


def test_criterion_11_counterexample_gap(battery):
    _assert(battery, 11)


def test_criterion_12_euler_residual(battery):
    _assert(battery, 12)


def test_criterion_13_two_dim_reduction(battery):
    _assert(battery, 13)


def test_criterion_14_selftest_determinism(battery):
    _assert(battery, 14)
