"""One-dimensional periodic (Hill) operators on [0, 2*pi].

K(theta) = -d_x^2 + V(x) with the twisted boundary condition
f(2 pi) = e^{2 pi i theta} f(0).  In the Fourier basis e^{i(m+theta)x} the
matrix is diag (m+theta)^2 plus the Toeplitz matrix of the Fourier
coefficients of V.  The decoupled reference operator of the channel is

    H_{n,n} = alpha (2n+1) + K_n(theta),   V_n = W_n(x) = <phi_n| W |phi_n>,

whose n = 0 gaps the full band computation is compared against.

An independent oracle discretizes K(theta) by central finite differences on
a uniform grid with the phase-wrapped corner entries and Richardson
extrapolation in the step size; it shares nothing with the Fourier route
but the potential values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .channel import ChannelParams, Potential
from .hermite import project_potential
from .numutil import complement_within, golden_section_minimize, merge_intervals

__all__ = [
    "hill_matrix",
    "hill_spectrum",
    "fd_hill_eigenvalues",
    "fd_hill_richardson",
    "HillBands",
    "hill_bands",
    "h00_gaps",
]


def _coeff_lookup(coeffs) -> Callable[[int], complex]:
    if isinstance(coeffs, Mapping):
        table = {int(k): complex(v) for k, v in coeffs.items()}
        return lambda k: table.get(k, 0.0 + 0.0j)
    arr = np.asarray(coeffs)
    if arr.ndim != 1 or arr.size % 2 == 0:
        raise ValueError("coefficient array must have odd length 2*K+1 for k in [-K, K]")
    half = arr.size // 2
    return lambda k: complex(arr[k + half]) if abs(k) <= half else 0.0 + 0.0j


def hill_matrix(coeffs, theta: float, m_max: int = 32) -> np.ndarray:
    """Fourier matrix of -d^2 + V at Bloch phase theta.

    coeffs: mapping k -> c_k or odd-length array centered at k = 0, with
    V(x) = sum_k c_k e^{ikx} and c_{-k} = conj(c_k).
    """
    if abs(theta) > 0.5 + 1e-12:
        raise ValueError("theta must lie in [-1/2, 1/2]")
    c = _coeff_lookup(coeffs)
    ms = np.arange(-m_max, m_max + 1)
    h = np.empty((ms.size, ms.size), dtype=complex)
    for i, mi in enumerate(ms):
        for j, mj in enumerate(ms):
            h[i, j] = c(mi - mj)
    h[np.arange(ms.size), np.arange(ms.size)] += (ms + theta) ** 2
    dev = float(np.max(np.abs(h - h.conj().T)))
    if dev > 1e-12 * max(1.0, float(np.max(np.abs(h)))):
        raise ValueError("coefficients violate c_-k = conj(c_k); matrix not Hermitian")
    return 0.5 * (h + h.conj().T)


def hill_spectrum(coeffs, theta: float, m_max: int = 32, count: int | None = None) -> np.ndarray:
    """Ascending eigenvalues of the Fourier-discretized Hill operator."""
    vals = scipy.linalg.eigh(hill_matrix(coeffs, theta, m_max), eigvals_only=True)
    return vals[:count] if count is not None else vals


# ---------------------------------------------------------------------------
# finite-difference oracle


def fd_hill_eigenvalues(
    potential: Callable[[np.ndarray], np.ndarray],
    theta: float,
    n_points: int,
    count: int,
) -> np.ndarray:
    """Lowest eigenvalues of the central-difference Hill matrix.

    The twisted boundary condition enters only the two corner entries
    -e^{+-2 pi i theta}/h^2.  Solved in shift-invert Lanczos mode with a
    fixed start vector, so results are deterministic.
    """
    if n_points < 8:
        raise ValueError("need at least 8 grid points")
    h = 2.0 * math.pi / n_points
    x = h * np.arange(n_points)
    v = np.asarray(potential(x), dtype=float)
    main = 2.0 / h**2 + v
    off = -np.ones(n_points - 1) / h**2
    mat = scipy.sparse.diags(
        [off, main, off], offsets=[-1, 0, 1], format="lil", dtype=complex
    )
    phase = complex(math.cos(2.0 * math.pi * theta), math.sin(2.0 * math.pi * theta))
    mat[n_points - 1, 0] += -phase / h**2
    mat[0, n_points - 1] += -phase.conjugate() / h**2
    sigma = float(np.min(v)) - 1.0
    vals = scipy.sparse.linalg.eigsh(
        mat.tocsc(),
        k=count,
        sigma=sigma,
        which="LM",
        v0=np.ones(n_points) / math.sqrt(n_points),
        return_eigenvectors=False,
    )
    return np.sort(vals.real)


def fd_hill_richardson(
    potential: Callable[[np.ndarray], np.ndarray],
    theta: float,
    count: int,
    n_points: int = 2048,
) -> np.ndarray:
    """Richardson-extrapolated finite-difference eigenvalues.

    The h^2 error term of the central difference cancels in
    (4 E_{2h->h} - E_h) / 3, leaving O(h^4).
    """
    coarse = fd_hill_eigenvalues(potential, theta, n_points // 2, count)
    fine = fd_hill_eigenvalues(potential, theta, n_points, count)
    return (4.0 * fine - coarse) / 3.0


# ---------------------------------------------------------------------------
# band structure of a Hill operator


@dataclass(eq=False)
class HillBands:
    """Sorted eigenvalue curves epsilon_j(theta) with refined extrema."""

    theta_grid: np.ndarray
    bands: np.ndarray  # (theta_count, band_count)
    band_intervals: np.ndarray  # (band_count, 2), refined
    m_max: int

    def union_intervals(self) -> list[tuple[float, float]]:
        return merge_intervals([tuple(row) for row in self.band_intervals])


def _refine_band_extrema(
    value_fn: Callable[[float, int], float],
    theta_grid: np.ndarray,
    band_values: np.ndarray,
    j: int,
    xtol: float,
) -> tuple[float, float]:
    """Golden-section refinement of min and max of band j over theta.

    The band is 1-periodic in theta, so brackets around an endpoint
    extremum wrap; value_fn must accept any real theta.
    """
    lo = _refine_one(value_fn, theta_grid, band_values, j, xtol, sign=+1.0)
    hi = -_refine_one(value_fn, theta_grid, band_values, j, xtol, sign=-1.0)
    lo = min(lo, float(np.min(band_values)))
    hi = max(hi, float(np.max(band_values)))
    return lo, hi


def _refine_one(value_fn, theta_grid, band_values, j, xtol, sign) -> float:
    idx = int(np.argmin(sign * band_values))
    step = theta_grid[1] - theta_grid[0]
    a = theta_grid[idx] - step
    b = theta_grid[idx] + step
    _, fmin = golden_section_minimize(lambda t: sign * value_fn(t, j), a, b, xtol)
    return min(fmin, float(np.min(sign * band_values)))


def hill_bands(
    coeffs,
    m_max: int = 32,
    theta_count: int = 17,
    band_count: int = 8,
    refine: bool = True,
    xtol: float = 1e-8,
) -> HillBands:
    """Band structure of -d^2 + V over a uniform theta grid.

    theta_count must be odd and >= 9 so the grid contains theta = 0 and the
    +-1/2 endpoints, where band edges of real potentials sit; the refinement
    verifies that numerically instead of assuming it.
    """
    if theta_count < 9 or theta_count % 2 == 0:
        raise ValueError("theta_count must be odd and >= 9")
    grid = np.linspace(-0.5, 0.5, theta_count)
    rows = [hill_spectrum(coeffs, t, m_max, band_count) for t in grid]
    bands = np.vstack(rows)

    def value_fn(theta: float, j: int) -> float:
        theta = theta - round(theta)  # spectrum is 1-periodic in theta
        return float(hill_spectrum(coeffs, theta, m_max, j + 1)[j])

    intervals = np.empty((band_count, 2))
    for j in range(band_count):
        if refine:
            intervals[j] = _refine_band_extrema(value_fn, grid, bands[:, j], j, xtol)
        else:
            intervals[j] = (float(np.min(bands[:, j])), float(np.max(bands[:, j])))
    return HillBands(theta_grid=grid, bands=bands, band_intervals=intervals, m_max=m_max)


def h00_gaps(
    params: ChannelParams,
    spec: Potential,
    ceiling: float,
    m_max: int = 32,
    theta_count: int = 17,
    gap_tolerance: float | None = None,
):
    """Spectral gaps of the decoupled block H_{0,0} = alpha + spec(K_0) below the ceiling.

    K_0 = -d_x^2 + W_0(x) with W_0 the lowest diagonal Hermite projection
    of the potential.
    """
    from .bands import GapReport  # shared report type; bands imports this module

    if gap_tolerance is None:
        gap_tolerance = 1e-6 * params.alpha
    proj = project_potential(spec, params, nmax=0, mfourier=2 * m_max)
    coeffs = proj.diag_coeffs(0)
    # generous band count: free bands reach (k/2)^2, need alpha + eps <= ceiling
    span = max(ceiling - params.alpha, 1.0)
    band_count = min(2 * m_max - 2, int(2.0 * math.sqrt(span)) + 4)
    hb = hill_bands(coeffs, m_max=m_max, theta_count=theta_count, band_count=band_count)
    shifted = [(params.alpha + lo, params.alpha + hi) for lo, hi in hb.band_intervals]
    covered = merge_intervals(shifted)
    lower = covered[0][0] if covered else params.alpha
    gaps = complement_within(covered, lower, ceiling, gap_tolerance)
    return GapReport(
        gaps=tuple(gaps),
        lower=lower,
        ceiling=ceiling,
        tolerance=gap_tolerance,
        band_intervals=tuple((float(lo), float(hi)) for lo, hi in shifted),
    )
