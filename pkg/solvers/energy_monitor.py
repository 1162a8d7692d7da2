from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from solvers.base_solver import BaseSolver
from solvers.velocity_solver import SurfaceVelocity
from utils import spectral
from utils.config_parser import NumericsConfig, PhysicsParams
from utils.geometry import FullState, SolidBoundary, chord_arc_constant, clearances


@dataclass(frozen=True)
class EnergyBreakdown:
    e0: float
    e1: float
    ej: Tuple[float, ...]
    total: float
    j_max: int

    def as_row(self) -> Dict[str, float]:
        row = {"e0": self.e0, "e1": self.e1}
        row.update({f"e{j}": value for j, value in enumerate(self.ej, start=2)})
        row["total"] = self.total
        return row


def _norm2(u: np.ndarray) -> float:
    return float(spectral.integrate(u ** 2))


class EnergyMonitor(BaseSolver):
    """Energy functional, admissibility diagnostics and the energy-rate probe"""

    def __init__(self, params: PhysicsParams, numerics: Optional[NumericsConfig] = None):
        super().__init__("EnergyMonitor")
        self.params = params
        self.numerics = numerics or NumericsConfig()

    def process(self, input_data: FullState) -> Dict[str, Any]:
        try:
            breakdown = self.energy(input_data)
            return {"success": True, "energy": breakdown}
        except Exception as e:
            return self.handle_error(e, "energy evaluation")

    def energy(self, state: FullState, j_max: Optional[int] = None) -> EnergyBreakdown:
        """
        Energy 𝓔 = e0 + e1 + Σ_{j=2}^{j_max} e_j.

        e0 = ½(‖θ‖² + ‖γ‖² + ‖ω‖² + Σ‖β‖²), e1 = ½(‖ω_α‖² + Σ‖β_α‖²) and
        e_j = ½∫ (∂^{j-1}θ)² + (∂^{j-2}γ)Λ(∂^{j-2}γ)/(4τs_α) + γ²(∂^{j-2}γ)²/(16τ²s_α²) dα.
        """
        j_max = self.numerics.j_max if j_max is None else j_max
        tau = self.params.tau
        s = state.surface.s_alpha
        theta, gamma = state.surface.theta, state.gamma
        e0 = 0.5 * (_norm2(theta) + _norm2(gamma) + _norm2(state.omega)
                    + sum(_norm2(beta) for beta in state.betas))
        e1 = 0.5 * (_norm2(spectral.deriv(state.omega))
                    + sum(_norm2(spectral.deriv(beta)) for beta in state.betas))
        higher = []
        for j in range(2, j_max + 1):
            theta_j = spectral.deriv(theta, order=j - 1)
            gamma_j = spectral.deriv(gamma, order=j - 2)
            integrand = (theta_j ** 2
                         + gamma_j * spectral.lambda_op(gamma_j) / (4.0 * tau * s)
                         + gamma ** 2 * gamma_j ** 2 / (16.0 * tau ** 2 * s ** 2))
            higher.append(0.5 * float(spectral.integrate(integrand)))
        total = e0 + e1 + sum(higher)
        return EnergyBreakdown(e0=e0, e1=e1, ej=tuple(higher), total=total, j_max=j_max)

    def wave_energy(self, state: FullState, vel: SurfaceVelocity) -> float:
        """Kinetic + potential + capillary energy of the wave motion"""
        geo = vel.geometry
        phi, _ = spectral.antideriv_meanzero(geo.s_alpha * vel.W_t_hat + 0.5 * state.gamma)
        eta = np.imag(geo.zeta)
        xi_alpha = np.real(geo.zeta_alpha)
        kinetic = 0.5 * spectral.integrate(phi * vel.U * geo.s_alpha)
        potential = 0.5 * self.params.g * spectral.integrate(eta ** 2 * xi_alpha)
        capillary = self.params.tau * (state.surface.L - np.real(geo.period))
        return float(kinetic + potential + capillary)

    def windowed_energy(self, state: FullState, chi: np.ndarray) -> float:
        """½∫χ_ω(θ² + γ²) dα"""
        return 0.5 * float(spectral.integrate(chi * (state.surface.theta ** 2 + state.gamma ** 2)))

    def admissibility(self, state: FullState, solids: Sequence[SolidBoundary]) -> Dict[str, Any]:
        zeta = state.surface.zeta
        depth, gaps = clearances(zeta, solids)
        return {
            "chord_arc": chord_arc_constant(zeta),
            "depth": depth,
            "gaps": gaps,
            "min_gap": min(gaps) if gaps else float("inf"),
        }

    def energy_rate_probe(self, records: pd.DataFrame, exponent_n: float = 2.0,
                          exponent_m: float = 1.0) -> Dict[str, Any]:
        """
        Compare d𝓔/dt along a trajectory with 𝓔 + 𝓔^N + χ(1 + |V₀|)(√𝓔 + 𝓔^M).

        Args:
            records: diagnostics with at least three rows and columns time, total

        Returns:
            Report with the finite-difference rates, the polynomial bound and the
            smallest constant c making |d𝓔/dt| ≤ c·bound hold on every record
        """
        if len(records) < 3:
            raise ValueError("the energy-rate probe needs at least three records")
        time = records["time"].to_numpy(dtype=float)
        total = records["total"].to_numpy(dtype=float)
        rate = np.gradient(total, time)
        chi = self.params.chi
        bound = (total + total ** exponent_n
                 + chi * (1.0 + abs(self.params.V0)) * (np.sqrt(total) + total ** exponent_m))
        positive = bound > 0
        ratios = np.abs(rate[positive]) / bound[positive]
        constant = float(ratios.max()) if ratios.size else 0.0
        report = {
            "time": time,
            "rate": rate,
            "bound": bound,
            "fitted_constant": constant,
            "max_abs_rate": float(np.max(np.abs(rate))),
        }
        self.log_activity("energy_rate_probe", {"records": len(records), "fitted_constant": constant,
                                                "max_abs_rate": report["max_abs_rate"]})
        return report
