"""Smoke tests for the python bindings: each main operation runs and
reproduces a value the C++ suites pin down independently."""

import math

import numpy as np
import pytest

import beamlab


def test_basis_orthonormality_and_eigenvalues():
    basis = beamlab.OscillatorBasis(omega=1.0, n_max=32)
    assert basis.orthonormality_error <= 1e-10
    assert basis.eigenvalue(3) == pytest.approx(7.0)
    z = np.array([0.0])
    assert basis.eval_mode(0, z)[0] == pytest.approx(math.pi ** -0.25, rel=1e-12)


def test_round_trip_through_quadrature():
    basis = beamlab.OscillatorBasis(omega=1.0 / math.sqrt(2.0), n_max=24)
    coeffs = [0.0] * 25
    coeffs[0], coeffs[5] = 1.0, -0.3
    back = basis.analyze(basis.synthesize(coeffs))
    assert np.allclose(back, coeffs, atol=1e-10)


def test_hierarchy_energies():
    sol = beamlab.solve_hierarchy(p=2.0, sigma=1, n_terms=2, omega=1.0)
    assert sol.energies[0] == pytest.approx(1.0, abs=1e-12)
    assert sol.energies[1] == pytest.approx(-1.0 / math.sqrt(2.0), abs=1e-10)
    assert max(sol.defects) <= 1e-8
    assembled = beamlab.assemble(sol, 1.0 / 16)
    assert assembled["lambda"] == pytest.approx(
        256.0 * (1.0 + assembled["energy"] / 16.0), rel=1e-14
    )


def test_profile_presets():
    paper = beamlab.build_profile("paper")
    assert paper.elliptic
    assert paper.omega == pytest.approx(math.sqrt(0.5), rel=1e-12)
    assert paper.v1(0.0) == pytest.approx(-0.25, abs=1e-12)
    flat = beamlab.build_profile("flat")
    assert flat.effective_potential(3, 0.5) == pytest.approx(9.0)


def test_quasimode_and_diagnostics():
    profile = beamlab.build_profile("paper")
    sol = beamlab.solve_hierarchy(p=2.0, sigma=1, n_terms=1, omega=profile.omega)
    field = beamlab.build_quasimode(sol, 16, profile)
    assert field.l2_norm == pytest.approx(1.0, abs=1e-8)
    assert field.values.shape == (field.n_theta, field.n_x)
    diag = beamlab.residual(field, profile)
    assert 0.0 < diag["reduced_residual"] < 0.1
    loc = beamlab.localization(field, 0.45)
    assert loc["tube_mass_out"] <= 0.01


def test_short_evolution_conserves_mass():
    profile = beamlab.build_profile("paper")
    sol = beamlab.solve_hierarchy(p=2.0, sigma=1, n_terms=1, omega=profile.omega)
    field = beamlab.build_quasimode(sol, 8, profile)
    trace = beamlab.run_evolution(field, profile, t_final=field.h**2)
    mass = np.asarray(trace["mass"])
    assert np.max(np.abs(mass / mass[0] - 1.0)) <= 1e-9
    assert trace["dist_to_app"][-1] < 0.05


def test_fit_slope_and_horizon():
    slope, _, resid = beamlab.fit_slope([(1 / 8, 1 / 8), (1 / 16, 1 / 16), (1 / 32, 1 / 32)])
    assert slope == pytest.approx(1.0, abs=1e-13)
    assert resid <= 1e-13
    assert beamlab.horizon_time("power", 0.125, 2.0) == pytest.approx(0.125**2)
