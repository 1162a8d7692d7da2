"""
Initial-data and boundary builders driven by a RunConfig.
"""

from pathlib import Path
from typing import List, Optional, Sequence
import logging

import numpy as np

from solvers.base_solver import ConfigSemanticError, ReparameterizationError
from utils import spectral
from utils.checkpoint_formatter import CheckpointFormatter
from utils.config_parser import RunConfig
from utils.geometry import (FullState, SolidBoundary, SurfaceState, circular_obstacle, fourier_bottom,
                            load_boundary_table, winding_number)

logger = logging.getLogger(__name__)

REPARAMETERIZATION_TOLERANCE = 1e-12
REPARAMETERIZATION_MAX_ITER = 100


def build_solids(config: RunConfig, base_dir: Optional[Path] = None) -> List[SolidBoundary]:
    """Bottom first, then obstacles in configuration order"""
    n = config.numerics.N
    base_dir = Path(base_dir or ".")
    geometry = config.geometry
    if geometry.bottom_file:
        bottom = load_boundary_table(base_dir / geometry.bottom_file, "bottom", n)
    else:
        bottom = fourier_bottom(n, geometry.depth, geometry.bottom_modes)
    solids = [bottom]
    for obstacle in config.obstacles:
        if obstacle.file:
            solids.append(load_boundary_table(base_dir / obstacle.file, "obstacle", n, obstacle.name))
        else:
            solids.append(circular_obstacle(n, complex(*obstacle.center), obstacle.radius, obstacle.name))
    if config.physics.chi:
        center = config.physics.cylinder_center
        if not any(winding_number(s, center) != 0 for s in solids[1:]):
            raise ConfigSemanticError("z_c must lie inside an obstacle", location="physics.z_c")
    return solids


def rest_state(n: int, n_obstacles: int = 0) -> FullState:
    zeros = np.zeros(n)
    return FullState(surface=SurfaceState(theta=zeros.copy(), L=2.0 * np.pi, base=0j),
                     gamma=zeros.copy(), omega=zeros.copy(),
                     betas=tuple(zeros.copy() for _ in range(n_obstacles)))


def arclength_abscissa(n: int, slope) -> np.ndarray:
    """
    Abscissa x(α) of a graph y = η(x) sampled uniformly in arclength.

    Solves x = α + ∂^{-1}(c(x)/mean c(x) - 1), c = 1/√(1 + η′(x)²), by fixed-point iteration.
    """
    alpha = spectral.nodes(n)
    x = alpha.copy()
    for iteration in range(REPARAMETERIZATION_MAX_ITER):
        c = 1.0 / np.sqrt(1.0 + slope(x) ** 2)
        correction, _ = spectral.antideriv_meanzero(c / np.mean(c))
        updated = alpha + correction - correction[0]
        change = float(np.max(np.abs(updated - x)))
        x = updated
        if change < REPARAMETERIZATION_TOLERANCE:
            logger.debug("arclength reparameterization converged in %d iterations", iteration + 1)
            return x
    raise ReparameterizationError(
        f"arclength reparameterization did not converge in {REPARAMETERIZATION_MAX_ITER} iterations")


def cosine_state(n: int, amplitude: float, wavenumber: int, n_obstacles: int = 0) -> FullState:
    """Surface η = a cos(kx) at rest (γ = 0) in tangent-angle form"""
    if amplitude == 0.0:
        return rest_state(n, n_obstacles)

    def slope(x):
        return -amplitude * wavenumber * np.sin(wavenumber * x)

    x = arclength_abscissa(n, slope)
    c = 1.0 / np.sqrt(1.0 + slope(x) ** 2)
    zeros = np.zeros(n)
    surface = SurfaceState(theta=np.arctan(slope(x)), L=2.0 * np.pi / float(np.mean(c)),
                           base=1j * amplitude)
    return FullState(surface=surface, gamma=zeros.copy(), omega=zeros.copy(),
                     betas=tuple(zeros.copy() for _ in range(n_obstacles)))


def linear_frequency(wavenumber: float, depth: float, g: float, tau: float) -> float:
    """ω with ω² = (gk + τk³) tanh(kh)"""
    k = wavenumber
    return float(np.sqrt((g * k + tau * k ** 3) * np.tanh(k * depth)))


def traveling_state(n: int, amplitude: float, wavenumber: int, depth: float, fredholm) -> FullState:
    """
    Rightward linear progressive wave: cosine geometry plus densities that reproduce
    the surface potential derivative φ_α = aω coth(kh) cos(kξ) ξ_α.
    """
    state = cosine_state(n, amplitude, wavenumber, len(fredholm.obstacles))
    params = fredholm.params
    frequency = linear_frequency(wavenumber, depth, params.g, params.tau)
    zeta = state.surface.zeta
    xi = np.real(zeta)
    xi_alpha = state.surface.s_alpha * np.cos(state.surface.theta)
    phi_alpha = amplitude * frequency / np.tanh(wavenumber * depth) * np.cos(wavenumber * xi) * xi_alpha
    return fredholm.densities_from_potential(state, phi_alpha)


def build_initial_data(config: RunConfig, solids: Sequence[SolidBoundary], fredholm=None,
                       base_dir: Optional[Path] = None) -> FullState:
    """
    Build the initial FullState described by config.initial_data.

    Args:
        fredholm: FredholmSolver for the density solves (traveling waves, Neumann equilibration)
    """
    request = config.initial_data
    n = config.numerics.N
    n_obstacles = len(solids) - 1
    if request.kind == "rest":
        state = rest_state(n, n_obstacles)
    elif request.kind == "cosine":
        state = cosine_state(n, request.amplitude, request.wavenumber, n_obstacles)
    elif request.kind == "traveling":
        if fredholm is None:
            raise ValueError("traveling-wave initial data needs a FredholmSolver")
        return traveling_state(n, request.amplitude, request.wavenumber, config.geometry.depth, fredholm)
    else:
        state, _ = CheckpointFormatter().read_checkpoint(Path(base_dir or ".") / request.file)
        if state.n != n or len(state.betas) != n_obstacles:
            raise ConfigSemanticError("initial data file does not match the grid or obstacle count",
                                      location="initial_data.file")
        return state
    if request.densities == "neumann" and fredholm is not None:
        state = fredholm.equilibrate_densities(state)
    return state
