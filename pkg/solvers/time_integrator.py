from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd

from solvers.base_solver import (AdmissibilityError, BaseSolver, ChordArcError, ClearanceError,
                                 EnergyCeilingError, SimulationError)
from solvers.energy_monitor import EnergyBreakdown, EnergyMonitor
from solvers.fredholm_solver import FredholmSolver, StateRates
from utils import spectral
from utils.config_parser import DampingConfig, NumericsConfig, PhysicsParams
from utils.geometry import FullState, SolidBoundary, SurfaceState


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    time: float
    step: int
    state: FullState = field(repr=False)
    energy: EnergyBreakdown = field(repr=False)
    chord_arc: float = 0.0
    depth: float = 0.0
    gaps: Tuple[float, ...] = ()
    residual: float = 0.0
    mu_abs: float = 0.0
    wave_energy: float = 0.0
    length: float = 0.0

    def as_row(self) -> Dict[str, float]:
        row = {"time": self.time}
        row.update(self.energy.as_row())
        row.update({
            "chord_arc": self.chord_arc,
            "depth": self.depth,
            "min_gap": min(self.gaps) if self.gaps else float("inf"),
            "residual": self.residual,
            "mu_abs": self.mu_abs,
            "step": self.step,
            "wave_energy": self.wave_energy,
            "length": self.length,
        })
        return row


@dataclass
class Trajectory:
    records: List[TrajectoryRecord] = field(default_factory=list)
    termination_reason: str = "completed"
    termination_detail: Dict[str, Any] = field(default_factory=dict)

    @property
    def final_state(self) -> Optional[FullState]:
        return self.records[-1].state if self.records else None

    def to_frame(self) -> pd.DataFrame:
        """Diagnostics table: time, e0, e1, e2..e_jmax, total, chord_arc, depth, min_gap, residual, mu_abs, ..."""
        return pd.DataFrame([record.as_row() for record in self.records])


def _advance(state: FullState, rates: StateRates, h: float) -> FullState:
    surface = state.surface
    return FullState(
        surface=SurfaceState(theta=surface.theta + h * rates.theta_t, L=surface.L + h * rates.L_t,
                             base=surface.base + h * rates.base_t, time=surface.time + h),
        gamma=state.gamma + h * rates.gamma_t,
        omega=state.omega + h * rates.omega_t,
        betas=tuple(beta + h * rate for beta, rate in zip(state.betas, rates.betas_t)),
        step=state.step,
    )


class TimeIntegrator(BaseSolver):
    """Classical four-stage Runge-Kutta integration with admissibility gates"""

    def __init__(self, solids: Sequence[SolidBoundary], params: PhysicsParams,
                 numerics: Optional[NumericsConfig] = None, damping: Optional[DampingConfig] = None,
                 record_every: int = 1):
        super().__init__("TimeIntegrator")
        self.solids = list(solids)
        self.params = params
        self.numerics = numerics or NumericsConfig()
        self.fredholm = FredholmSolver(self.solids, params, self.numerics, damping)
        self.monitor = EnergyMonitor(params, self.numerics)
        self.record_every = record_every
        self.last_rates: Optional[StateRates] = None
        self.last_residual = 0.0
        self.last_diagnostics: Optional[Dict[str, Any]] = None

    def process(self, input_data: Dict[str, Any]) -> Dict[str, Any]:
        """
        Integrate from an initial state

        Args:
            input_data: {"state": FullState, "t_end": float (optional)}

        Returns:
            Dictionary with the trajectory and its termination reason
        """
        trajectory = self.run(input_data["state"], input_data.get("t_end"))
        return {
            "success": trajectory.termination_reason == "completed",
            "trajectory": trajectory,
            "termination_reason": trajectory.termination_reason,
        }

    def cfl_dt(self, state: FullState) -> float:
        """
        Step size from the capillary stiffness bound cfl·(s_αΔα)^{3/2}/√(πτ),
        capped by gravity-wave and advective bounds. A configured dt overrides.
        """
        if self.numerics.dt is not None:
            return self.numerics.dt
        cfl = self.numerics.cfl_factor
        h = state.surface.s_alpha * 2.0 * np.pi / state.n
        bounds = [cfl * h ** 1.5 / np.sqrt(np.pi * self.params.tau)]
        if self.params.g > 0:
            bounds.append(cfl * np.sqrt(h / (np.pi * self.params.g)))
        speed = abs(self.params.V0) + float(np.max(np.abs(state.gamma))) / (2.0 * state.surface.s_alpha)
        if speed > 0:
            bounds.append(cfl * h / speed)
        return float(min(bounds))

    def rates(self, state: FullState) -> StateRates:
        return self.fredholm.solve_step(state)

    def step(self, state: FullState, dt: float) -> FullState:
        """One RK4 step followed by high-mode filtering of θ and γ and the admissibility gates"""
        k1 = self.rates(state)
        k2 = self.rates(_advance(state, k1, 0.5 * dt))
        k3 = self.rates(_advance(state, k2, 0.5 * dt))
        k4 = self.rates(_advance(state, k3, dt))
        stages = (k1, k2, k3, k4)
        weights = (1.0, 2.0, 2.0, 1.0)

        def combine(current, pick):
            return current + dt / 6.0 * sum(w * pick(k) for w, k in zip(weights, stages))

        threshold = self.numerics.filter_threshold
        surface = state.surface
        new_state = FullState(
            surface=SurfaceState(
                theta=spectral.krasny_filter(combine(surface.theta, lambda k: k.theta_t), threshold),
                L=combine(surface.L, lambda k: k.L_t),
                base=combine(surface.base, lambda k: k.base_t),
                time=surface.time + dt,
            ),
            gamma=spectral.krasny_filter(combine(state.gamma, lambda k: k.gamma_t), threshold),
            omega=combine(state.omega, lambda k: k.omega_t),
            betas=tuple(combine(beta, lambda k, p=p: k.betas_t[p]) for p, beta in enumerate(state.betas)),
            step=state.step + 1,
        )
        self.last_rates = k1
        self.last_residual = max(k.residual for k in stages)
        self.last_diagnostics = self.check_gates(new_state)
        return new_state

    def check_gates(self, state: FullState) -> Dict[str, Any]:
        """Clearance, chord-arc and energy gates, in that order; raises on the first violation"""
        diagnostics = self.monitor.admissibility(state, self.solids)
        if diagnostics["depth"] < self.numerics.min_depth:
            raise ClearanceError("surface too close to the bottom",
                                 value=diagnostics["depth"], threshold=self.numerics.min_depth)
        if diagnostics["min_gap"] < self.numerics.min_obstacle_gap:
            raise ClearanceError("surface too close to an obstacle",
                                 value=diagnostics["min_gap"], threshold=self.numerics.min_obstacle_gap)
        if diagnostics["chord_arc"] < self.numerics.chord_arc_floor:
            raise ChordArcError("chord-arc constant below floor",
                                value=diagnostics["chord_arc"], threshold=self.numerics.chord_arc_floor)
        energy = self.monitor.energy(state)
        if not energy.total < self.numerics.energy_ceiling:
            raise EnergyCeilingError("energy above ceiling",
                                     value=energy.total, threshold=self.numerics.energy_ceiling)
        diagnostics["energy"] = energy
        return diagnostics

    def record(self, state: FullState, diagnostics: Optional[Dict[str, Any]] = None) -> TrajectoryRecord:
        diagnostics = diagnostics or self.check_gates(state)
        velocity = self.fredholm.velocity_solver.assemble_W_U_V(state)
        mu = self.last_rates.mu if self.last_rates is not None else 0j
        return TrajectoryRecord(
            time=state.time,
            step=state.step,
            state=state,
            energy=diagnostics["energy"],
            chord_arc=diagnostics["chord_arc"],
            depth=diagnostics["depth"],
            gaps=tuple(diagnostics["gaps"]),
            residual=self.last_residual,
            mu_abs=abs(mu),
            wave_energy=self.monitor.wave_energy(state, velocity),
            length=state.surface.L,
        )

    def run(self, initial: FullState, t_end: Optional[float] = None,
            on_record: Optional[Callable[[TrajectoryRecord], None]] = None,
            on_checkpoint: Optional[Callable[[FullState], None]] = None,
            checkpoint_every: int = 0) -> Trajectory:
        """
        Integrate to t_end or the first gate violation.

        Records are taken every `record_every` steps and at the final time; a
        violation ends the run cleanly with the gate name as termination reason.
        """
        t_end = self.numerics.t_end if t_end is None else t_end
        trajectory = Trajectory()
        self.log_activity("run_started", {"time": initial.time, "t_end": t_end, "n": initial.n,
                                          "obstacles": len(initial.betas), "mode": self.numerics.solver_mode})

        def emit(current: FullState, diagnostics: Optional[Dict[str, Any]] = None):
            record = self.record(current, diagnostics)
            trajectory.records.append(record)
            if on_record is not None:
                on_record(record)

        state = initial
        try:
            emit(state)
            recorded_step = state.step
            tolerance = 1e-12 * max(1.0, abs(t_end))
            while state.time < t_end - tolerance:
                dt = min(self.cfl_dt(state), t_end - state.time)
                state = self.step(state, dt)
                if state.step % self.record_every == 0:
                    emit(state, self.last_diagnostics)
                    recorded_step = state.step
                    self.log_activity("step_recorded", {"step": state.step, "time": state.time,
                                                        "total_energy": trajectory.records[-1].energy.total,
                                                        "residual": self.last_residual})
                else:
                    self.log_activity("step", {"step": state.step, "time": state.time}, level=logging.DEBUG)
                if checkpoint_every and on_checkpoint is not None and state.step % checkpoint_every == 0:
                    on_checkpoint(state)
            if recorded_step != state.step:
                emit(state, self.last_diagnostics)
        except AdmissibilityError as e:
            failure = self.handle_error(e, f"time integration at t={state.time:.6g}",
                                        fallback={"records": len(trajectory.records)})
            trajectory.termination_reason = e.gate
            trajectory.termination_detail = failure["error"]
        except SimulationError as e:
            failure = self.handle_error(e, f"time integration at t={state.time:.6g}",
                                        fallback={"records": len(trajectory.records)})
            trajectory.termination_reason = "solver_failure"
            trajectory.termination_detail = failure["error"]
        self.log_activity("run_finished", {"reason": trajectory.termination_reason,
                                           "records": len(trajectory.records),
                                           "time": trajectory.records[-1].time if trajectory.records else None})
        return trajectory
