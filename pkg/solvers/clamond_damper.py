from typing import Any, Dict, Tuple
import logging

import numpy as np

from solvers.base_solver import BaseSolver
from solvers.velocity_solver import SurfaceVelocity
from utils import spectral
from utils.config_parser import DampingConfig
from utils.geometry import FullState


def smooth_step(x: np.ndarray) -> np.ndarray:
    """C^∞ transition from 0 (x ≤ 0) to 1 (x ≥ 1) built from e^{-1/x}"""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore"):
        rise = np.where(x > 0.0, np.exp(-1.0 / np.where(x > 0.0, x, 1.0)), 0.0)
        fall = np.where(x < 1.0, np.exp(-1.0 / np.where(x < 1.0, 1.0 - x, 1.0)), 0.0)
    return rise / (rise + fall)


class ClamondDamper(BaseSolver):
    """Pneumatic damper: an external pressure proportional to χ_ω φ_α on a window of the surface"""

    def __init__(self, config: DampingConfig):
        super().__init__("ClamondDamper")
        self.config = config

    def process(self, input_data: Dict[str, Any]) -> Dict[str, Any]:
        """
        Evaluate the damper on one state

        Args:
            input_data: {"state": FullState, "velocity": SurfaceVelocity}

        Returns:
            Dictionary with the cutoff, the γ_t modification and the pressure diagnostic
        """
        try:
            state = input_data["state"]
            velocity = input_data["velocity"]
            chi = self.build_cutoff(np.real(state.surface.zeta))
            pressure, removed_mean = self.p_ext_diagnostic(state, velocity, chi)
            return {
                "success": True,
                "chi": chi,
                "damping_term": self.damping_term(state, velocity, chi),
                "p_ext": pressure,
                "p_ext_mean": removed_mean,
            }
        except Exception as e:
            return self.handle_error(e, "damping evaluation")

    def build_cutoff(self, xi: np.ndarray) -> np.ndarray:
        """
        χ_ω at the surface abscissae ξ(α).

        The window [start, end] is taken on the circle of circumference 2π; χ_ω = 1
        on the window, 0 beyond a ramp of width `ramp` on either side.
        """
        start, end, ramp = self.config.start, self.config.end, self.config.ramp
        width = end - start
        if width <= 0.0:
            return np.zeros_like(xi, dtype=float)
        if width >= 2.0 * np.pi:
            return np.ones_like(xi, dtype=float)
        center = 0.5 * (start + end)
        distance = np.abs((np.asarray(xi) - center + np.pi) % (2.0 * np.pi) - np.pi)
        return smooth_step((0.5 * width + ramp - distance) / ramp)

    def phi_alpha(self, state: FullState, vel: SurfaceVelocity) -> np.ndarray:
        """Tangential derivative of the surface velocity potential, s_α W·t̂ + γ/2"""
        return vel.geometry.s_alpha * vel.W_t_hat + 0.5 * state.gamma

    def damping_term(self, state: FullState, vel: SurfaceVelocity, chi: np.ndarray) -> np.ndarray:
        return -2.0 * chi * self.phi_alpha(state, vel)

    def p_ext_diagnostic(self, state: FullState, vel: SurfaceVelocity,
                         chi: np.ndarray) -> Tuple[np.ndarray, float]:
        """Mean-zero antiderivative of χ_ω φ_α and the removed mean"""
        pressure, removed_mean = spectral.antideriv_meanzero(chi * self.phi_alpha(state, vel))
        if removed_mean != 0.0:
            self.log_activity("p_ext_mean_removed", {"time": state.time, "mean": float(removed_mean)},
                              level=logging.DEBUG)
        return pressure, float(removed_mean)
