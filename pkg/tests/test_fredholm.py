#!/usr/bin/env python3
"""
Tests for the right-hand side assembly and the second-kind system for (γ_t, ω_t, β_t)
"""

import sys
import os

import numpy as np
import pytest
from scipy import special

# Add the project root to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from evaluation.acceptance_suite import AcceptanceSuite, standard_config
from solvers.base_solver import SolverResidualError
from solvers.clamond_damper import ClamondDamper
from solvers.fredholm_solver import FredholmSolver
from utils import spectral
from utils.config_parser import DampingConfig
from utils.geometry import FullState, SurfaceState, circular_obstacle
from utils.initial_data import build_solids, cosine_state, rest_state


def _solver(n=32, obstacle=True, **numerics):
    config = standard_config(n, obstacle=obstacle, **numerics)
    return FredholmSolver(build_solids(config), config.physics, config.numerics)


def test_system_structure():
    print("Testing system assembly...")
    solver = _solver()
    state = cosine_state(32, 0.02, 1, 1)
    system = solver.assemble_system(state)
    assert system.matrix.shape == (96, 96)
    assert system.block(2, 2).shape == (32, 32)
    assert np.all(np.isfinite(system.matrix))

    print("\n1. Flat surface decouples γ from its own row...")
    flat = solver.assemble_system(rest_state(32, 1))
    assert np.allclose(flat.block(0, 0), np.eye(32), atol=1e-12)
    print("✅ System structure test completed successfully!")


def test_rest_state_is_stationary():
    solver = _solver()
    rates = solver.solve_step(rest_state(32, 1))
    for values in (rates.theta_t, rates.gamma_t, rates.omega_t, rates.betas_t[0]):
        assert np.max(np.abs(values)) == 0.0
    assert rates.L_t == 0.0
    assert rates.residual == 0.0


def test_direct_and_neumann_solutions_agree():
    print("Testing direct and relaxed Neumann solves...")
    solver = _solver()
    state = solver.equilibrate_densities(
        cosine_state(32, 0.02, 1, 1).with_fields(gamma=0.05 * np.sin(spectral.nodes(32))))
    system = solver.assemble_system(state)
    rhs = solver.assemble_rhs(state).stacked()

    direct, residual, condition = solver.solve_linear(system.matrix, rhs)
    neumann = _solver(linear_solver="neumann")
    iterated, iterated_residual, _ = neumann.solve_linear(system.matrix, rhs)
    print(f"   residuals {residual:.2e} / {iterated_residual:.2e}, condition {condition:.2e}")
    assert residual <= 1e-10 and iterated_residual <= 1e-10
    assert np.max(np.abs(direct - iterated)) <= 1e-9 * max(1.0, np.max(np.abs(direct)))
    assert 1.0 <= condition < 1e6

    strict = _solver(residual_tol=1e-30)
    with pytest.raises(SolverResidualError):
        strict.solve_linear(system.matrix, rhs)
    print("✅ Linear solve test completed successfully!")


def test_equilibrated_densities_satisfy_neumann_rows():
    solver = _solver()
    state = cosine_state(32, 0.02, 1, 1).with_fields(gamma=0.05 * np.cos(spectral.nodes(32)))
    state = solver.equilibrate_densities(state)
    system = solver.assemble_system(state)
    x = np.concatenate([state.gamma, state.omega, state.betas[0]])
    assert np.max(np.abs(system.matrix[32:] @ x)) < 1e-10


def test_densities_reproduce_potential():
    """γ, ω, β from a prescribed φ_α reproduce it through s_α W·t̂ + γ/2"""
    solver = _solver()
    state = cosine_state(32, 0.02, 1, 1)
    xi_alpha = state.surface.s_alpha * np.cos(state.surface.theta)
    phi_alpha = 0.01 * np.cos(np.real(state.surface.zeta)) * xi_alpha
    state = solver.densities_from_potential(state, phi_alpha)
    vel = solver.velocity_solver.assemble_W_U_V(state)
    recovered = ClamondDamper(DampingConfig()).phi_alpha(state, vel)
    assert np.max(np.abs(recovered - phi_alpha)) < 1e-10


def test_model_mode_skips_the_solve():
    solver = _solver(solver_mode="model")
    state = cosine_state(32, 0.02, 1, 1).with_fields(gamma=0.05 * np.cos(spectral.nodes(32)))
    rates = solver.solve_step(state)
    rhs = solver.assemble_rhs(state)
    assert np.array_equal(rates.gamma_t, rhs.f_gamma)
    assert np.array_equal(rates.omega_t, rhs.f_omega)
    assert rates.residual == 0.0


def test_model_and_full_modes_share_theta_rate():
    full, model = _solver(), _solver(solver_mode="model")
    state = full.equilibrate_densities(
        cosine_state(32, 0.02, 1, 1).with_fields(gamma=0.05 * np.sin(spectral.nodes(32))))
    full_rates, model_rates = full.solve_step(state), model.solve_step(state)
    assert np.array_equal(full_rates.theta_t, model_rates.theta_t)
    assert full_rates.L_t == model_rates.L_t
    assert not np.array_equal(full_rates.gamma_t, model_rates.gamma_t)


def test_distant_obstacle_leaves_rates_unchanged():
    """An obstacle with β = 0 placed far below decouples from the obstacle-free solve"""
    print("Testing the large-separation limit...")
    n = 32
    alpha = spectral.nodes(n)
    config = standard_config(n, obstacle=False)
    solids = build_solids(config)
    state = cosine_state(n, 0.02, 1).with_fields(gamma=0.05 * np.sin(alpha), omega=0.02 * np.cos(alpha))

    alone = FredholmSolver(solids, config.physics, config.numerics).solve_step(state)
    distant = FredholmSolver(solids + [circular_obstacle(n, complex(np.pi, -20.0), 0.2)],
                             config.physics, config.numerics)
    paired = distant.solve_step(state.with_fields(betas=(np.zeros(n),)))
    for name in ("theta_t", "gamma_t", "omega_t"):
        difference = float(np.max(np.abs(getattr(alone, name) - getattr(paired, name))))
        print(f"   {name}: {difference:.2e}")
        assert difference <= 1e-8
    print("✅ Large-separation test completed successfully!")


def test_gamma_rate_linearizes_to_capillary_gravity_terms():
    """At γ = ω = 0 the γ row is (2τ/s_α)θ_αα - 2gη_α, which is -2(τ + g)εcos α to O(ε²)"""
    print("Testing the small-amplitude γ row...")
    n = 32
    alpha = spectral.nodes(n)
    solver = _solver(n, obstacle=False)
    tau, g = solver.params.tau, solver.params.g
    for epsilon in (1e-2, 1e-3):
        theta = epsilon * np.cos(alpha)
        # length that closes the curve over one period
        L = 2.0 * np.pi / special.j0(epsilon)
        state = FullState(surface=SurfaceState(theta=theta, L=L, base=0j),
                          gamma=np.zeros(n), omega=np.zeros(n))
        rhs = solver.assemble_rhs(state)
        s = L / (2.0 * np.pi)
        nonlinear = 2.0 * tau / s * (-theta) - 2.0 * g * s * np.sin(theta)
        linear = -2.0 * (tau + g) * theta
        assert np.max(np.abs(rhs.f_gamma - nonlinear)) < 1e-12
        error = float(np.max(np.abs(rhs.f_gamma - linear)))
        print(f"   ε = {epsilon:.0e}: linearization error {error:.2e}")
        assert error <= epsilon ** 2
    print("✅ Linearization test completed successfully!")


def test_mollified_rates_approach_unmollified():
    """With δ below the grid resolution J_δ is the identity on resolved modes"""
    state = cosine_state(32, 0.02, 1)
    state = state.with_fields(gamma=0.05 * np.cos(spectral.nodes(32)))
    plain = _solver(obstacle=False).assemble_rhs(state)
    mollified = _solver(obstacle=False, mollifier_delta=1.0 / 16).assemble_rhs(state)
    assert np.allclose(plain.f_theta, mollified.f_theta, atol=1e-10)
    assert np.allclose(plain.f_gamma, mollified.f_gamma, atol=1e-10)


def test_decomposition_and_fredholm_suites():
    print("Testing the decomposition and Fredholm acceptance suites...")
    suite = AcceptanceSuite()
    for check in (suite.decomposition, suite.fredholm_solve):
        passed, metrics = check()
        print(f"   {check.__name__}: {metrics}")
        assert passed
    print("✅ Suite test completed successfully!")


def main():
    test_system_structure()
    test_rest_state_is_stationary()
    test_direct_and_neumann_solutions_agree()
    test_equilibrated_densities_satisfy_neumann_rows()
    test_densities_reproduce_potential()
    test_model_mode_skips_the_solve()
    test_model_and_full_modes_share_theta_rate()
    test_distant_obstacle_leaves_rates_unchanged()
    test_gamma_rate_linearizes_to_capillary_gravity_terms()
    test_mollified_rates_approach_unmollified()
    test_decomposition_and_fredholm_suites()
    return True


if __name__ == "__main__":
    main()
