"""
Periodic spectral operators on equispaced grids over [0, 2π).

All functions take numpy arrays of N samples at α_m = 2πm/N (N even) and are
pure. Fourier coefficients are normalized as û_k = (1/N) Σ u_m e^{-ikα_m}, so
u(α) = Σ û_k e^{ikα}. The Nyquist mode k = N/2 is discarded by every
multiplier below.
"""

from typing import Tuple

import numpy as np
from scipy import fft as sp_fft

from solvers.base_solver import GridError

MIN_GRID_SIZE = 4


def check_grid(u: np.ndarray) -> int:
    """Return N, raising GridError when N is odd or too small"""
    n = np.shape(u)[-1]
    if n < MIN_GRID_SIZE or n % 2:
        raise GridError(f"grid size must be even and >= {MIN_GRID_SIZE}, got {n}")
    return n


def nodes(n: int) -> np.ndarray:
    """Equispaced parameter nodes α_m = 2πm/N"""
    if n < MIN_GRID_SIZE or n % 2:
        raise GridError(f"grid size must be even and >= {MIN_GRID_SIZE}, got {n}")
    return 2.0 * np.pi * np.arange(n) / n


def wavenumbers(n: int) -> np.ndarray:
    """Integer wavenumbers in FFT order (k = -N/2 appears once, as the Nyquist mode)"""
    return sp_fft.fftfreq(n, 1.0 / n)


def coefficients(u: np.ndarray) -> np.ndarray:
    """Normalized Fourier coefficients û_k"""
    check_grid(u)
    return sp_fft.fft(u) / np.shape(u)[-1]


def _apply(u: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
    n = check_grid(u)
    values = sp_fft.ifft(sp_fft.fft(u) * multiplier)
    if np.isrealobj(u):
        return values.real
    return values


def _nyquist_free(n: int) -> np.ndarray:
    mask = np.ones(n)
    mask[n // 2] = 0.0
    return mask


def deriv(u: np.ndarray, order: int = 1) -> np.ndarray:
    """∂_α^order u via the multiplier (ik)^order"""
    n = check_grid(u)
    if order == 0:
        return np.array(u, copy=True)
    k = wavenumbers(n)
    return _apply(u, (1j * k) ** order * _nyquist_free(n))


def hilbert(u: np.ndarray) -> np.ndarray:
    """Hilbert transform: multiplier -i·sgn(k); the mean is annihilated"""
    n = check_grid(u)
    k = wavenumbers(n)
    return _apply(u, -1j * np.sign(k) * _nyquist_free(n))


def lambda_op(u: np.ndarray) -> np.ndarray:
    """Λ = ℍ∂_α, multiplier |k|"""
    n = check_grid(u)
    k = wavenumbers(n)
    return _apply(u, np.abs(k) * _nyquist_free(n))


def antideriv_meanzero(u: np.ndarray) -> Tuple[np.ndarray, complex]:
    """
    Mean-zero periodic antiderivative.

    Returns:
        (v, mean) with ∂_α v = u - mean(u) and mean(v) = 0
    """
    n = check_grid(u)
    k = wavenumbers(n)
    inverse = np.zeros(n, dtype=complex)
    nonzero = k != 0
    inverse[nonzero] = 1.0 / (1j * k[nonzero])
    inverse *= _nyquist_free(n)
    average = mean(u)
    return _apply(u, inverse), average


def mollify(u: np.ndarray, delta: float) -> np.ndarray:
    """J_δ: zero every mode with |k| > 1/δ"""
    if delta <= 0:
        raise ValueError("mollifier delta must be positive")
    n = check_grid(u)
    k = wavenumbers(n)
    return _apply(u, (np.abs(k) <= 1.0 / delta).astype(float))


def krasny_filter(u: np.ndarray, threshold: float) -> np.ndarray:
    """Zero Fourier modes whose magnitude is below threshold × the largest magnitude"""
    if threshold <= 0:
        raise ValueError("filter threshold must be positive")
    check_grid(u)
    spectrum = sp_fft.fft(u)
    magnitude = np.abs(spectrum)
    peak = magnitude.max()
    if peak == 0.0:
        return np.array(u, copy=True)
    spectrum[magnitude < threshold * peak] = 0.0
    values = sp_fft.ifft(spectrum)
    return values.real if np.isrealobj(u) else values


def commutator_hilbert(a: np.ndarray, f: np.ndarray) -> np.ndarray:
    """[ℍ, a]f = ℍ(a f) - a ℍf"""
    return hilbert(a * f) - a * hilbert(f)


def mean(u: np.ndarray):
    """Discrete mean (1/N) Σ u_m, the trapezoid value of (1/2π)∫u dα"""
    return np.mean(u, axis=-1)


def integrate(u: np.ndarray):
    """Trapezoid rule for ∫_0^{2π} u dα"""
    n = check_grid(u)
    return 2.0 * np.pi / n * np.sum(u, axis=-1)


def l2_norm(u: np.ndarray) -> float:
    """Discrete L² norm (∫|u|² dα)^{1/2}"""
    return float(np.sqrt(integrate(np.abs(u) ** 2)))


def sobolev_norm(u: np.ndarray, r: float) -> float:
    """
    Discrete H^r norm.

    ‖u‖²_r = 2π Σ_k (1 + k²)^r |û_k|², which reduces to the trapezoid L² norm at r = 0.
    """
    n = check_grid(u)
    k = wavenumbers(n)
    weights = (1.0 + k ** 2) ** r
    return float(np.sqrt(2.0 * np.pi * np.sum(weights * np.abs(coefficients(u)) ** 2)))


def resample(u: np.ndarray, m: int) -> np.ndarray:
    """Band-limited interpolation of u onto M >= N equispaced nodes"""
    n = check_grid(u)
    if m < n or m % 2:
        raise GridError(f"resample target must be even and >= {n}, got {m}")
    spectrum = sp_fft.fft(u)
    padded = np.zeros(m, dtype=complex)
    half = n // 2
    padded[:half] = spectrum[:half]
    padded[m - half + 1:] = spectrum[half + 1:]
    if m > n:
        padded[half] = 0.5 * spectrum[half]
        padded[m - half] = 0.5 * spectrum[half]
    else:
        padded[half] = spectrum[half]
    values = sp_fft.ifft(padded) * (m / n)
    return values.real if np.isrealobj(u) else values
