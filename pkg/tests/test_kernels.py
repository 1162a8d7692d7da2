#!/usr/bin/env python3
"""
Tests for the cotangent kernels, the surface operators and the Green identities
"""

import sys
import os

import numpy as np
import pytest

# Add the project root to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from evaluation.acceptance_suite import AcceptanceSuite
from solvers.base_solver import SingularEvaluationError
from utils import spectral
from utils.geometry import SurfaceState, circular_obstacle, flat_bottom, surface_geometry
from utils.kernels import (SurfaceOperators, boundary_kernels, cot_kernel, double_layer_boundary_value,
                           k_operator, kernel_identity, kernel_time_derivatives)
from utils.initial_data import cosine_state


def test_cot_kernel():
    """Values, far-field saturation and coincident points"""
    print("Testing the cotangent kernel...")
    assert abs(cot_kernel(1.0, 0.0) - 0.5 / np.tan(0.5)) < 1e-14
    z, w = 1.0 + 0.3j, 0.2
    assert abs(cot_kernel(z, w) - 0.5 / np.tan(0.5 * (z - w))) < 1e-13
    assert cot_kernel(0.0, -50j) == -0.5j
    assert cot_kernel(0.0, 50j) == 0.5j
    assert abs(cot_kernel(0.0, -5j) - 0.5 / np.tan(2.5j)) < 1e-14

    values = cot_kernel(np.array([0.5, 1.5]), np.array([0.0, 0.0]))
    assert values.shape == (2,)

    with pytest.raises(SingularEvaluationError):
        cot_kernel(0.5, 0.5)
    with pytest.raises(SingularEvaluationError):
        cot_kernel(0.5 + 2 * np.pi, 0.5)
    print("✅ Cotangent kernel test completed successfully!")


def test_surface_operators():
    print("Testing the surface operators...")
    n = 64
    alpha = spectral.nodes(n)

    print("\n1. Flat surface: K vanishes and the PV integral is a Hilbert transform...")
    flat = SurfaceState(theta=np.zeros(n), L=2 * np.pi, base=0j)
    operators = SurfaceOperators(surface_geometry(flat))
    assert np.max(np.abs(operators.k_matrix)) < 1e-13
    assert np.allclose(operators.pvi(np.cos(alpha)), np.sin(alpha) / 2j, atol=1e-10)
    assert np.allclose(k_operator(flat, np.sin(3 * alpha)), 0.0, atol=1e-13)

    print("2. Curved surface: both forms of the PV integral agree...")
    theta = 0.2 * np.cos(alpha)
    curved = SurfaceState(theta=theta, L=2 * np.pi / np.mean(np.cos(theta)), base=0j)
    operators = SurfaceOperators(surface_geometry(curved))
    gamma = (np.cos(alpha) + 0.4 * np.sin(2 * alpha)).astype(complex)
    direct = operators.pvi(gamma)
    decomposed = operators.pvi_decomposed(gamma)
    assert np.max(np.abs(direct - decomposed)) < 1e-8 * np.max(np.abs(direct))
    print("✅ Surface operator test completed successfully!")


def test_boundary_kernels_flat_configuration():
    """Flat bottom: self kernel vanishes; surface kernel reproduces the exponential decay"""
    n = 64
    alpha = spectral.nodes(n)
    surface_zeta = alpha.astype(complex)
    kernels = boundary_kernels(surface_zeta, [flat_bottom(n, 1.0)])
    assert np.max(np.abs(kernels.k_B1.entries)) < 1e-14
    assert kernels.k_C1 == [] and kernels.k_S2 == []
    # (1/π)∫cos(α′) k_S¹ dα′ = e^{-h} sin α
    response = kernels.k_S1.apply(np.cos(alpha)) / np.pi
    assert np.allclose(response, np.exp(-1.0) * np.sin(alpha), atol=1e-12)


def test_kernel_time_derivatives_match_finite_differences():
    n = 32
    alpha = spectral.nodes(n)
    solids = [flat_bottom(n, 1.0), circular_obstacle(n, complex(np.pi, -0.5), 0.2)]
    state = cosine_state(n, 0.05, 1, 1)
    zeta = state.surface.zeta
    zeta_t = 0.3 * np.exp(1j * alpha) + 0.1j * np.cos(2 * alpha)
    rate_bottom, rate_obstacles = kernel_time_derivatives(state, solids, zeta_t)

    eps = 1e-6
    ahead = boundary_kernels(zeta + eps * zeta_t, solids)
    behind = boundary_kernels(zeta - eps * zeta_t, solids)
    fd_bottom = (ahead.k_S1.entries - behind.k_S1.entries) / (2 * eps)
    fd_obstacle = (ahead.k_S2[0].entries - behind.k_S2[0].entries) / (2 * eps)
    assert np.max(np.abs(rate_bottom.entries - fd_bottom)) < 1e-6 * np.max(np.abs(fd_bottom))
    assert np.max(np.abs(rate_obstacles[0].entries - fd_obstacle)) < 1e-6 * np.max(np.abs(fd_obstacle))
    assert rate_bottom.weight == 2 * np.pi / n


def test_circle_double_layer():
    """PV of the double layer of a constant density on a circle is -1/2"""
    circle = circular_obstacle(64, complex(np.pi, -0.5), 0.3)
    values = double_layer_boundary_value(np.ones(64), circle)
    assert np.allclose(values, -0.5, atol=1e-12)


def test_green_identity_flat_configuration():
    print("Testing the Green identity on the flat-bottom + cylinder configuration...")
    surface = SurfaceState(theta=np.zeros(128), L=2 * np.pi, base=0j)
    curves = [surface, flat_bottom(128, 1.0), circular_obstacle(128, complex(np.pi, -0.5), 0.2)]
    assert abs(kernel_identity(1.0 - 0.5j, curves) - 1.0) < 1e-8
    assert abs(kernel_identity(complex(np.pi, -0.5), curves)) < 1e-8
    assert abs(kernel_identity(2.0 + 0.5j, curves)) < 1e-8
    assert abs(kernel_identity(curves[2].zeta[7], curves, on_node=(2, 7)) - 0.5) < 1e-6

    passed, metrics = AcceptanceSuite(n=128).green_identity()
    print(f"   {metrics}")
    assert passed
    print("✅ Green identity test completed successfully!")


def test_mittag_leffler_and_jump_relations():
    suite = AcceptanceSuite(n=64)
    passed, metrics = suite.mittag_leffler()
    print(f"   Mittag-Leffler: {metrics}")
    assert passed
    passed, metrics = suite.jump_relations()
    print(f"   Jump relations: {metrics}")
    assert passed


def main():
    test_cot_kernel()
    test_surface_operators()
    test_boundary_kernels_flat_configuration()
    test_kernel_time_derivatives_match_finite_differences()
    test_circle_double_layer()
    test_green_identity_flat_configuration()
    test_mittag_leffler_and_jump_relations()
    return True


if __name__ == "__main__":
    main()
