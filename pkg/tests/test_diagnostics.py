#!/usr/bin/env python3
"""
Tests for the energy functional and the admissibility diagnostics
"""

import sys
import os

import numpy as np
import pandas as pd
import pytest

# Add the project root to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from evaluation.acceptance_suite import AcceptanceSuite, standard_config
from solvers.energy_monitor import EnergyMonitor
from solvers.velocity_solver import VelocitySolver
from utils import spectral
from utils.initial_data import build_solids, rest_state


def test_energy_of_single_mode():
    """θ = ε cos α at rest: each of e0, e2, e3 equals πε²/2"""
    print("Testing the energy functional...")
    config = standard_config(32, obstacle=False)
    monitor = EnergyMonitor(config.physics, config.numerics)
    epsilon = 0.01
    state = rest_state(32).with_fields(theta=epsilon * np.cos(spectral.nodes(32)))

    energy = monitor.energy(state)
    print(f"   {energy.as_row()}")
    assert abs(energy.e0 - 0.5 * np.pi * epsilon ** 2) < 1e-15
    assert energy.e1 == 0.0
    assert len(energy.ej) == 2
    assert abs(energy.total - 1.5 * np.pi * epsilon ** 2) < 1e-14
    assert monitor.energy(state, j_max=2).total < energy.total
    assert monitor.energy(rest_state(32)).total == 0.0
    print("✅ Energy test completed successfully!")


def test_wave_energy_and_window():
    config = standard_config(32, obstacle=False)
    solids = build_solids(config)
    monitor = EnergyMonitor(config.physics, config.numerics)
    state = rest_state(32)
    vel = VelocitySolver(solids, config.physics).assemble_W_U_V(state)
    assert monitor.wave_energy(state, vel) == 0.0

    gamma = 0.1 * np.sin(spectral.nodes(32))
    state = state.with_fields(gamma=gamma)
    assert abs(monitor.windowed_energy(state, np.ones(32)) - monitor.energy(state).e0) < 1e-15
    assert monitor.windowed_energy(state, np.zeros(32)) == 0.0


def test_admissibility_diagnostics():
    config = standard_config(32)
    monitor = EnergyMonitor(config.physics, config.numerics)
    diagnostics = monitor.admissibility(rest_state(32, 1), build_solids(config))
    assert abs(diagnostics["chord_arc"] - 1.0) < 1e-12
    assert abs(diagnostics["depth"] - 1.0) < 1e-12
    assert abs(diagnostics["min_gap"] - 0.3) < 1e-12


def test_energy_rate_probe():
    print("Testing the energy-rate probe...")
    config = standard_config(32, obstacle=False)
    monitor = EnergyMonitor(config.physics, config.numerics)
    records = pd.DataFrame({"time": [0.0, 0.5, 1.0, 1.5], "total": [1.0, 1.5, 2.0, 2.5]})
    report = monitor.energy_rate_probe(records)
    assert np.allclose(report["rate"], 1.0)
    # bound 𝓔 + 𝓔² is smallest at t = 0, where it equals 2
    assert abs(report["fitted_constant"] - 0.5) < 1e-12

    with pytest.raises(ValueError):
        monitor.energy_rate_probe(records.iloc[:2])
    print("✅ Energy-rate probe test completed successfully!")


def test_energy_bound_and_periodicity_suites():
    print("Testing energy boundedness and periodicity maintenance...")
    suite = AcceptanceSuite()
    passed, metrics = suite.energy_bound()
    print(f"   energy: {metrics}")
    assert passed
    passed, metrics = suite.periodicity(steps=200)
    print(f"   periodicity: {metrics}")
    assert passed
    print("✅ Suite test completed successfully!")


def main():
    test_energy_of_single_mode()
    test_wave_energy_and_window()
    test_admissibility_diagnostics()
    test_energy_rate_probe()
    test_energy_bound_and_periodicity_suites()
    return True


if __name__ == "__main__":
    main()
