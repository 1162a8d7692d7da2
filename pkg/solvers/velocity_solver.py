from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import logging

from solvers.base_solver import BaseSolver, ChordArcError
from utils import spectral
from utils.config_parser import NumericsConfig, PhysicsParams
from utils.geometry import FullState, SolidBoundary, SurfaceGeometry, surface_geometry
from utils.kernels import SurfaceOperators, cot_matrix, cot_kernel, split_solids


def cyl_gradient(zeta: np.ndarray, params: PhysicsParams) -> np.ndarray:
    """∇φ_cyl at ζ; its conjugate is ½ - i·½cot(½(ζ - z_c))"""
    return np.conj(0.5 - 1j * cot_kernel(zeta, params.cylinder_center))


def cyl_hessian(zeta: np.ndarray, params: PhysicsParams) -> np.ndarray:
    """Complex second derivative of the cylinder potential, i/4·csc²(½(ζ - z_c))"""
    return 1j * (0.25 + cot_kernel(zeta, params.cylinder_center) ** 2)


@dataclass(frozen=True, eq=False)
class SurfaceVelocity:
    """Velocity traces on the free surface; vectors are complex arrays"""

    BR: np.ndarray
    Y: np.ndarray
    Z: Tuple[np.ndarray, ...]
    W: np.ndarray
    W_tilde: np.ndarray
    U: np.ndarray
    U_parts: Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    W_t_hat: np.ndarray
    V: np.ndarray
    zeta_t: np.ndarray
    s_alpha_t: float
    BR_alpha: np.ndarray
    m: np.ndarray
    W_tilde_alpha: np.ndarray
    geometry: SurfaceGeometry = field(repr=False)
    operators: SurfaceOperators = field(repr=False)


class VelocitySolver(BaseSolver):
    """Assembles W = BR + Y + Z + χ(a₀∇φ_cyl + V₀) and the derived surface rates"""

    def __init__(self, solids: Sequence[SolidBoundary], params: PhysicsParams,
                 numerics: Optional[NumericsConfig] = None):
        super().__init__("VelocitySolver")
        self.solids = list(solids)
        self.bottom, self.obstacles = split_solids(self.solids)
        self.params = params
        self.numerics = numerics or NumericsConfig()

    def process(self, input_data: FullState) -> Dict[str, Any]:
        try:
            velocity = self.assemble_W_U_V(input_data)
            self.log_activity("velocity_assembled", {
                "time": input_data.time,
                "max_U": float(np.max(np.abs(velocity.U))),
                "s_alpha_t": velocity.s_alpha_t,
            })
            return {"success": True, "velocity": velocity}
        except Exception as e:
            return self.handle_error(e, "velocity assembly")

    def operators(self, state: FullState) -> SurfaceOperators:
        return SurfaceOperators(surface_geometry(state.surface))

    def birkhoff_rott(self, state: FullState, operators: Optional[SurfaceOperators] = None) -> np.ndarray:
        """Alternating-point quadrature of the Birkhoff-Rott integral"""
        operators = operators or self.operators(state)
        return np.conj(operators.pvi(state.gamma))

    def birkhoff_rott_decomposed(self, state: FullState,
                                 operators: Optional[SurfaceOperators] = None) -> np.ndarray:
        """Birkhoff-Rott integral as (1/2i)ℍ(γ/ζ_α) + K[ζ]γ, conjugated back"""
        operators = operators or self.operators(state)
        return np.conj(operators.pvi_decomposed(state.gamma.astype(complex)))

    def br_alpha(self, state: FullState,
                 operators: Optional[SurfaceOperators] = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        ∂_α BR split into its leading Hilbert part and the smoothing remainder m.

        Returns:
            (BR_α, m) as complex vectors
        """
        operators = operators or self.operators(state)
        geo = operators.geometry
        gamma = state.gamma
        gamma_alpha = spectral.deriv(gamma)
        s = geo.s_alpha
        zeta_alpha = geo.zeta_alpha
        h = gamma_alpha - gamma * geo.zeta_alpha_alpha / zeta_alpha
        g = h / zeta_alpha
        m_conj = (zeta_alpha / 2j * spectral.commutator_hilbert(zeta_alpha ** -2, h)
                  + zeta_alpha * operators.k_apply(g))
        m = np.conj(m_conj)
        leading = (spectral.hilbert(gamma_alpha) / (2.0 * s) * geo.normal
                   - spectral.hilbert(gamma * geo.theta_alpha) / (2.0 * s) * geo.tangent)
        return leading + m, m

    def single_layer_velocities(self, state: FullState) -> Tuple[np.ndarray, List[np.ndarray]]:
        """(Y from the bottom density ω, [Z from each obstacle density β])"""
        zeta = state.surface.zeta
        spacing = 2.0 * np.pi / state.n
        Y = np.conj(spacing / (2.0 * np.pi) * cot_matrix(zeta, self.bottom.zeta)
                    @ (state.omega * self.bottom.s_alpha))
        Z = [np.conj(spacing / (2.0 * np.pi) * cot_matrix(zeta, obstacle.zeta) @ (beta * obstacle.s_alpha))
             for obstacle, beta in zip(self.obstacles, state.betas)]
        return Y, Z

    def single_layer_rate(self, state: FullState, direction: np.ndarray) -> np.ndarray:
        """
        Conjugate derivative of Y + ΣZ when the surface points move with `direction`.

        With direction = ζ_α this is 𝔠(Y_α + ΣZ_α)*; with direction = ζ_t it is 𝔠(F_Y + ΣF_Z)*.
        """
        zeta = state.surface.zeta
        spacing = 2.0 * np.pi / state.n
        total = np.zeros(state.n, dtype=complex)
        for solid, density in zip([self.bottom] + self.obstacles, (state.omega,) + tuple(state.betas)):
            quarter_csc2 = 0.25 + cot_matrix(zeta, solid.zeta) ** 2
            total += quarter_csc2 @ (density * solid.s_alpha)
        return -direction * spacing / (2.0 * np.pi) * total

    def cylinder_velocity(self, zeta: np.ndarray) -> np.ndarray:
        """χ(a₀∇φ_cyl + V₀)"""
        if self.params.chi == 0.0:
            return np.zeros(len(zeta), dtype=complex)
        return self.params.chi * (self.params.a0 * cyl_gradient(zeta, self.params) + self.params.V0)

    def cylinder_rate(self, zeta: np.ndarray, direction: np.ndarray) -> np.ndarray:
        """Conjugate rate of χa₀∇φ_cyl along `direction`"""
        if self.params.chi == 0.0 or self.params.a0 == 0.0:
            return np.zeros(len(zeta), dtype=complex)
        return self.params.chi * self.params.a0 * cyl_hessian(zeta, self.params) * direction

    def tangential_velocity(self, geo: SurfaceGeometry, U: np.ndarray) -> Tuple[np.ndarray, float]:
        """V with ∂_αV = θ_αU - mean(θ_αU), and s_αt = -mean(θ_αU)"""
        V, average = spectral.antideriv_meanzero(geo.theta_alpha * U)
        gauge = self.numerics.tangential_gauge
        if gauge == "pinned":
            V = V - V[0]
        elif gauge == "fixed_abscissa":
            V = V - V[0] + U[0] * np.tan(geo.theta[0])
        return V, -float(np.real(average))

    def assemble_W_U_V(self, state: FullState) -> SurfaceVelocity:
        operators = self.operators(state)
        geo = operators.geometry
        BR = self.birkhoff_rott(state, operators)
        Y, Z = self.single_layer_velocities(state)
        cylinder = self.cylinder_velocity(geo.zeta)
        W_tilde = Y + sum(Z, np.zeros(state.n, dtype=complex)) + cylinder
        W = BR + W_tilde

        def along(vector, frame):
            return np.real(np.conj(vector) * frame)

        U_parts = (along(BR, geo.normal), along(Y, geo.normal),
                   along(sum(Z, np.zeros(state.n, dtype=complex)), geo.normal), along(cylinder, geo.normal))
        U = along(W, geo.normal)
        W_t_hat = along(W, geo.tangent)
        V, s_alpha_t = self.tangential_velocity(geo, U)
        zeta_t = (1j * U + V) * geo.tangent

        BR_alpha, m = self.br_alpha(state, operators)
        W_tilde_alpha = np.conj(self.single_layer_rate(state, geo.zeta_alpha)
                                + self.cylinder_rate(geo.zeta, geo.zeta_alpha))
        self.log_activity("surface_velocity", {"time": state.time, "max_W": float(np.max(np.abs(W)))},
                          level=logging.DEBUG)
        return SurfaceVelocity(
            BR=BR, Y=Y, Z=tuple(Z), W=W, W_tilde=W_tilde, U=U, U_parts=U_parts, W_t_hat=W_t_hat,
            V=V, zeta_t=zeta_t, s_alpha_t=s_alpha_t, BR_alpha=BR_alpha, m=m,
            W_tilde_alpha=W_tilde_alpha, geometry=geo, operators=operators,
        )

    def mu_correction(self, state: FullState, vel: SurfaceVelocity,
                      theta_t: Optional[np.ndarray] = None) -> complex:
        """
        Constant added to θ_t so that d/dt ∫ζ_α dα = 0.

        Args:
            theta_t: the θ rate actually used; when omitted the continuum form
                U_α + Vθ_α is used in its place
        """
        geo = vel.geometry
        s = geo.s_alpha
        denominator = 1j * s * geo.period
        if abs(geo.period) < self.numerics.chord_arc_floor:
            raise ChordArcError("period integral of ζ_α is degenerate",
                                value=abs(geo.period), threshold=self.numerics.chord_arc_floor)
        if theta_t is None:
            U_alpha = spectral.deriv(vel.U)
            integrand = (vel.s_alpha_t * geo.zeta_alpha + 1j * U_alpha * geo.zeta_alpha
                         + vel.V * geo.zeta_alpha_alpha)
        else:
            integrand = (vel.s_alpha_t + 1j * s * theta_t) * geo.zeta_alpha
        return complex(-spectral.integrate(integrand) / denominator)
