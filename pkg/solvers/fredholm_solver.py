from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from solvers.base_solver import BaseSolver, SolverResidualError
from solvers.clamond_damper import ClamondDamper
from solvers.velocity_solver import SurfaceVelocity, VelocitySolver
from utils import spectral
from utils.config_parser import DampingConfig, NumericsConfig, PhysicsParams
from utils.geometry import FullState, SolidBoundary, SurfaceGeometry, surface_geometry
from utils.kernels import (SurfaceOperators, boundary_kernels, cot_matrix,
                           kernel_time_derivatives)


@dataclass(frozen=True, eq=False)
class RHSVector:
    """The four components of 𝔉; f_theta already includes Re μ"""

    f_theta: np.ndarray
    f_gamma: np.ndarray
    f_omega: np.ndarray
    f_betas: Tuple[np.ndarray, ...]
    mu: complex
    velocity: SurfaceVelocity = field(repr=False)

    def stacked(self) -> np.ndarray:
        """(𝔉₂, 𝔉₃, 𝔉₄...) in system order"""
        return np.concatenate((self.f_gamma, self.f_omega) + tuple(self.f_betas))


@dataclass(frozen=True, eq=False)
class SystemMatrix:
    """Dense (I + K) acting on stacked (γ_t, ω_t, β_1,t, ...)"""

    matrix: np.ndarray
    n: int
    n_obstacles: int

    def block(self, row: int, column: int) -> np.ndarray:
        n = self.n
        return self.matrix[row * n:(row + 1) * n, column * n:(column + 1) * n]


@dataclass(frozen=True, eq=False)
class StateRates:
    theta_t: np.ndarray
    gamma_t: np.ndarray
    omega_t: np.ndarray
    betas_t: Tuple[np.ndarray, ...]
    L_t: float
    base_t: complex
    residual: float
    condition: float
    mu: complex
    velocity: SurfaceVelocity = field(repr=False)


class FredholmSolver(BaseSolver):
    """Assembles and solves (I + K[Θ])Θ_t = 𝔉(Θ) for the density rates"""

    def __init__(self, solids: Sequence[SolidBoundary], params: PhysicsParams,
                 numerics: Optional[NumericsConfig] = None,
                 damping: Optional[DampingConfig] = None):
        super().__init__("FredholmSolver")
        self.solids = list(solids)
        self.params = params
        self.numerics = numerics or NumericsConfig()
        self.velocity_solver = VelocitySolver(self.solids, params, self.numerics)
        self.bottom = self.velocity_solver.bottom
        self.obstacles = self.velocity_solver.obstacles
        self.damper = ClamondDamper(damping) if damping is not None and damping.enabled else None

    def process(self, input_data: FullState) -> Dict[str, Any]:
        try:
            rates = self.solve_step(input_data)
            return {"success": True, "rates": rates}
        except Exception as e:
            return self.handle_error(e, "Fredholm solve")

    # ------------------------------------------------------------------ RHS

    def _br_bundle_decomposed(self, state: FullState, vel: SurfaceVelocity,
                              m_n: np.ndarray, Wa_n: np.ndarray, VmWT: np.ndarray) -> np.ndarray:
        """𝔠(br₁)* from the Hilbert and K[ζ] pieces"""
        geo, ops = vel.geometry, vel.operators
        H, K = spectral.hilbert, ops.k_apply
        s, s_t = geo.s_alpha, vel.s_alpha_t
        zeta_alpha, zeta_t = geo.zeta_alpha, vel.zeta_t
        gamma = state.gamma
        gamma_alpha = spectral.deriv(gamma)
        H_gamma_alpha = H(gamma_alpha)
        q = gamma / zeta_alpha
        g = spectral.deriv(q)
        theta_gamma = gamma * geo.theta_alpha
        a = VmWT / zeta_alpha
        return (
            (zeta_t * H(g / zeta_alpha) - H(zeta_t * g / zeta_alpha)) / 2j
            + zeta_t * K(g) - K(zeta_t * g)
            - s_t / (2j * s) * H(q)
            - s_t / s * K(gamma.astype(complex))
            - (H(q * H_gamma_alpha) - q * H(H_gamma_alpha)) / (4.0 * s ** 2)
            - 1j / (2.0 * s ** 2) * K((gamma * H_gamma_alpha).astype(complex))
            - H(gamma * m_n / zeta_alpha) / (2.0 * s)
            - 1j / s * K((gamma * m_n).astype(complex))
            - (H(a * theta_gamma) - a * H(theta_gamma)) / (2.0 * s)
            - 1j / s * K((theta_gamma * VmWT).astype(complex))
            - H(gamma * Wa_n / zeta_alpha) / (2.0 * s)
            - 1j / s * K((gamma * Wa_n).astype(complex))
        )

    def _br_bundle_direct(self, state: FullState, vel: SurfaceVelocity, VmWT: np.ndarray) -> np.ndarray:
        """𝔠(br₁)* from alternating-point quadrature of the undecomposed F_BR"""
        geo, ops = vel.geometry, vel.operators
        s, zeta_alpha, zeta_t = geo.s_alpha, geo.zeta_alpha, vel.zeta_t
        gamma = state.gamma
        q = gamma / zeta_alpha
        f_br = zeta_t * ops.pvi(spectral.deriv(q)) - ops.pvi(spectral.deriv(q * zeta_t))
        return (f_br + VmWT / (2.0 * s * zeta_alpha) * spectral.hilbert(gamma * geo.theta_alpha)
                - gamma * spectral.deriv(gamma) / (4.0 * s ** 2 * zeta_alpha))

    def assemble_rhs(self, state: FullState, vel: Optional[SurfaceVelocity] = None) -> RHSVector:
        vel = vel or self.velocity_solver.assemble_W_U_V(state)
        geo = vel.geometry
        H = spectral.hilbert
        s, tau, g = geo.s_alpha, self.params.tau, self.params.g
        gamma = state.gamma
        theta_alpha = geo.theta_alpha
        theta_aa = spectral.deriv(state.surface.theta, order=2)
        gamma_alpha = spectral.deriv(gamma)
        VmWT = vel.V - vel.W_t_hat

        def along(vector, frame):
            return np.real(np.conj(vector) * frame)

        m_t, m_n = along(vel.m, geo.tangent), along(vel.m, geo.normal)
        Wa_t, Wa_n = along(vel.W_tilde_alpha, geo.tangent), along(vel.W_tilde_alpha, geo.normal)
        if self.numerics.f_br_method == "direct":
            br_conj = self._br_bundle_direct(state, vel, VmWT)
        else:
            br_conj = self._br_bundle_decomposed(state, vel, m_n, Wa_n, VmWT)
        rates_conj = (self.velocity_solver.single_layer_rate(state, vel.zeta_t)
                      + self.velocity_solver.cylinder_rate(geo.zeta, vel.zeta_t))
        bundle_t = np.real((br_conj + rates_conj) * geo.tangent)
        eta_alpha = np.imag(geo.zeta_alpha)
        s_t = vel.s_alpha_t

        delta = self.numerics.mollifier_delta
        if delta == 0.0:
            f_theta = (H(gamma_alpha) / (2.0 * s ** 2) + theta_alpha * VmWT / s
                       + Wa_n / s + m_n / s)
            f_gamma = (2.0 * tau / s * theta_aa
                       + gamma / (2.0 * s ** 2) * H(gamma * theta_alpha)
                       + gamma_alpha / s * VmWT
                       - gamma * gamma_alpha / s ** 2
                       + gamma / s * (s_t - Wa_t - m_t)
                       - 2.0 * g * eta_alpha
                       + 2.0 * VmWT * (m_t + Wa_t)
                       - 2.0 * s * bundle_t)
        else:
            def J(u):
                return spectral.mollify(u, delta)

            J_theta_alpha = J(theta_alpha)
            J_gamma_alpha = J(gamma_alpha)
            f_theta = (H(J_gamma_alpha) / (2.0 * s ** 2) + J(VmWT * J_theta_alpha) / s
                       + Wa_n / s + m_n / s)
            m_gamma = (gamma / s * (s_t - Wa_t - m_t)
                       - 2.0 * g * eta_alpha
                       + 2.0 * J(VmWT * J(m_t + Wa_t))
                       - 2.0 * s * J(bundle_t)
                       - spectral.commutator_hilbert(gamma, gamma * J_theta_alpha / (2.0 * s ** 2)))
            f_gamma = (2.0 * tau / s * J(theta_aa)
                       + H(gamma ** 2 * J_theta_alpha) / (2.0 * s ** 2)
                       + J(VmWT * J_gamma_alpha) / s
                       - J(gamma * J_gamma_alpha) / s ** 2
                       + m_gamma)

        if self.damper is not None:
            chi = self.damper.build_cutoff(np.real(geo.zeta))
            f_gamma = f_gamma + self.damper.damping_term(state, vel, chi)

        mu = 0j
        if self.numerics.apply_mu:
            mu = self.velocity_solver.mu_correction(state, vel, theta_t=f_theta)
            f_theta = f_theta + mu.real

        k_St1, k_St2 = kernel_time_derivatives(state, self.solids, vel.zeta_t)
        f_omega = -k_St1.apply(gamma) / np.pi
        f_betas = tuple(-k.apply(gamma) / np.pi for k in k_St2)
        return RHSVector(f_theta=f_theta, f_gamma=f_gamma, f_omega=f_omega, f_betas=f_betas,
                         mu=mu, velocity=vel)

    # --------------------------------------------------------------- system

    def assemble_system(self, state: FullState, operators: Optional[SurfaceOperators] = None) -> SystemMatrix:
        operators = operators or SurfaceOperators(surface_geometry(state.surface))
        geo = operators.geometry
        n = state.n
        solids = [self.bottom] + self.obstacles
        blocks = len(solids) + 1
        matrix = np.zeros((blocks * n, blocks * n))
        spacing = 2.0 * np.pi / n
        tangent = geo.tangent[:, None]

        def put(row, column, values):
            matrix[row * n:(row + 1) * n, column * n:(column + 1) * n] = values

        put(0, 0, np.eye(n) + 2.0 * geo.s_alpha * np.real(tangent * operators.pvi_matrix))
        for column, solid in enumerate(solids, start=1):
            layer = spacing / (2.0 * np.pi) * cot_matrix(geo.zeta, solid.zeta) * solid.s_alpha[None, :]
            put(0, column, 2.0 * geo.s_alpha * np.real(tangent * layer))

        kernels = boundary_kernels(geo.zeta, self.solids)
        rows = [(kernels.k_S1, kernels.k_B1, kernels.k_C1)]
        rows += [(kernels.k_S2[p], kernels.k_B2[p], kernels.k_C2[p]) for p in range(len(self.obstacles))]
        for row, (sheet, from_bottom, from_obstacles) in enumerate(rows, start=1):
            put(row, 0, sheet.weight * sheet.entries / np.pi)
            for column, kernel in enumerate([from_bottom] + list(from_obstacles), start=1):
                values = kernel.weight * kernel.entries / np.pi
                if column == row:
                    values = values + np.eye(n)
                put(row, column, values)
        return SystemMatrix(matrix=matrix, n=n, n_obstacles=len(self.obstacles))

    def solve_linear(self, matrix: np.ndarray, rhs: np.ndarray) -> Tuple[np.ndarray, float, float]:
        """
        Solve (I + K)x = b.

        Returns:
            (x, relative residual, 1-norm condition estimate)
        """
        scale = np.linalg.norm(rhs)
        if self.numerics.linear_solver == "neumann":
            x, condition = self._relaxed_neumann(matrix, rhs), float("nan")
        else:
            lu = linalg.lu_factor(matrix)
            x = linalg.lu_solve(lu, rhs)
            x = x + linalg.lu_solve(lu, rhs - matrix @ x)
            rcond, _ = lapack.dgecon(lu[0], np.linalg.norm(matrix, 1), norm="1")
            condition = 1.0 / rcond if rcond > 0 else float("inf")
        if not np.all(np.isfinite(x)):
            raise SolverResidualError("linear solve produced non-finite values",
                                      value=float("inf"), threshold=self.numerics.residual_tol)
        residual = float(np.linalg.norm(rhs - matrix @ x) / scale) if scale > 0 else 0.0
        if residual > self.numerics.residual_tol:
            raise SolverResidualError(f"relative residual {residual:.3e} exceeds tolerance",
                                      value=residual, threshold=self.numerics.residual_tol)
        return x, residual, condition

    def _relaxed_neumann(self, matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        """x ← x + ϖ(b - (I + K)x); ϖ = 1 is the plain Neumann series"""
        relaxation = self.numerics.neumann_relaxation
        target = self.numerics.residual_tol * 0.1 * np.linalg.norm(rhs)
        x = relaxation * rhs
        for iteration in range(self.numerics.neumann_max_iter):
            update = rhs - matrix @ x
            if np.linalg.norm(update) <= target:
                self.log_activity("neumann_converged", {"iterations": iteration}, level=logging.DEBUG)
                return x
            x = x + relaxation * update
        raise SolverResidualError(
            f"Neumann iteration did not converge in {self.numerics.neumann_max_iter} iterations",
            value=float(np.linalg.norm(rhs - matrix @ x) / max(np.linalg.norm(rhs), 1e-300)),
            threshold=self.numerics.residual_tol)

    def solve_step(self, state: FullState) -> StateRates:
        rhs = self.assemble_rhs(state)
        vel = rhs.velocity
        n, count = state.n, len(self.obstacles)
        if self.numerics.solver_mode == "model":
            solution, residual, condition = rhs.stacked(), 0.0, 1.0
        else:
            system = self.assemble_system(state, vel.operators)
            solution, residual, condition = self.solve_linear(system.matrix, rhs.stacked())
        s = vel.geometry.s_alpha
        length_rate = 2.0 * np.pi * (vel.s_alpha_t - s * rhs.mu.imag)
        self.log_activity("solve_step", {"time": state.time, "residual": residual, "condition": condition,
                                         "mu": rhs.mu}, level=logging.DEBUG)
        return StateRates(
            theta_t=rhs.f_theta,
            gamma_t=solution[:n],
            omega_t=solution[n:2 * n],
            betas_t=tuple(solution[(2 + p) * n:(3 + p) * n] for p in range(count)),
            L_t=length_rate,
            base_t=complex(vel.zeta_t[0]),
            residual=residual,
            condition=condition,
            mu=rhs.mu,
            velocity=vel,
        )

    # ------------------------------------------------------ static densities

    def _static_rows(self, state: FullState) -> List[np.ndarray]:
        """-2χ(a₀∇φ_cyl + V₀)·n̂ on the bottom and each obstacle"""
        rows = []
        for solid in [self.bottom] + self.obstacles:
            flow = self.velocity_solver.cylinder_velocity(solid.zeta)
            rows.append(-2.0 * np.real(np.conj(flow) * solid.normal))
        return rows

    def equilibrate_densities(self, state: FullState) -> FullState:
        """Solve the Neumann conditions for (ω, β) with θ and γ held fixed"""
        n = state.n
        system = self.assemble_system(state)
        rhs = np.concatenate(self._static_rows(state)) - system.matrix[n:, :n] @ state.gamma
        if not np.any(rhs):
            return state.with_fields(omega=np.zeros(n), betas=tuple(np.zeros(n) for _ in self.obstacles))
        densities, residual, condition = self.solve_linear(system.matrix[n:, n:], rhs)
        self.log_activity("densities_equilibrated", {"residual": residual, "condition": condition})
        return state.with_fields(
            omega=densities[:n],
            betas=tuple(densities[(1 + p) * n:(2 + p) * n] for p in range(len(self.obstacles))))

    def densities_from_potential(self, state: FullState, phi_alpha: np.ndarray) -> FullState:
        """
        Find (γ, ω, β) reproducing a prescribed φ_α = s_α W·t̂ + γ/2 on the surface
        while satisfying the Neumann conditions on the solids.
        """
        geo = surface_geometry(state.surface)
        system = self.assemble_system(state)
        current = self.velocity_solver.cylinder_velocity(geo.zeta)
        surface_row = 2.0 * phi_alpha - 2.0 * geo.s_alpha * np.real(np.conj(current) * geo.tangent)
        rhs = np.concatenate([surface_row] + self._static_rows(state))
        solution, residual, condition = self.solve_linear(system.matrix, rhs)
        n = state.n
        self.log_activity("densities_from_potential", {"residual": residual, "condition": condition})
        return state.with_fields(
            gamma=solution[:n], omega=solution[n:2 * n],
            betas=tuple(solution[(2 + p) * n:(3 + p) * n] for p in range(len(self.obstacles))))
