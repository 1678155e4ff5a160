"""Bloch fiber matrices H(theta) in the Hermite-Fourier product basis.

After the Bloch-Floquet decomposition over theta in [-1/2, 1/2) and the
substitution s = sqrt(alpha) y, the fiber acts on the basis

    e_{n,m} = phi_n(s) e^{i m x} / sqrt(2 pi),   0 <= n < N,  |m - off| <= M,

with matrix elements

    <n,m| H(theta) |n',m'> = delta_{nn'} delta_{mm'} [alpha (2n+1) + (m+theta)^2]
                           + delta_{|n-n'|,1} delta_{mm'} B sqrt(2 max(n,n') / alpha) (m+theta)
                           + c^{(n,n')}_{m-m'}

where the middle line is the cross term 2 B (m+theta) y of the squared
magnetic momentum expanded through the ladder identity, and the c's are the
projected potential coefficients.  For W = 0 the exact eigenvalues are
alpha (2n+1) + beta (m+theta)^2: the magnetic ladder coupling is what bends
the bare (m+theta)^2 dispersion down to beta (m+theta)^2.

Storage is dense; the basis ordering is row = (m - off + M) * N + n so that
each Fourier index m owns a contiguous block of Hermite levels.
"""

from __future__ import annotations

import math
import tempfile
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .channel import ChannelParams
from .hermite import ProjectedPotential

__all__ = [
    "FiberMatrix",
    "assemble_fiber",
    "eigenvalues_fiber",
    "EigensolverError",
    "ResolventBoundCheck",
    "complex_theta_resolvent_bound",
]

_HERMITICITY_TOL = 1e-14


class EigensolverError(RuntimeError):
    """Eigensolver failed to converge; the matrix was dumped for inspection."""

    def __init__(self, message: str, dump_path: str):
        super().__init__(f"{message} (matrix dumped to {dump_path})")
        self.dump_path = dump_path


@dataclass(eq=False)
class FiberMatrix:
    """Assembled fiber with its index bookkeeping."""

    params: ChannelParams
    theta: float
    n_hermite: int
    m_max: int
    m_offset: int
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.n_hermite * (2 * self.m_max + 1)

    @property
    def m_window(self) -> np.ndarray:
        return np.arange(-self.m_max, self.m_max + 1) + self.m_offset

    def index(self, n: int, m: int) -> int:
        if not 0 <= n < self.n_hermite:
            raise IndexError(f"Hermite index {n} outside [0, {self.n_hermite})")
        pos = m - self.m_offset + self.m_max
        if not 0 <= pos <= 2 * self.m_max:
            raise IndexError(f"Fourier index {m} outside the window")
        return pos * self.n_hermite + n

    def entry(self, n: int, m: int, np_: int, mp: int) -> complex:
        return complex(self.entries[self.index(n, m), self.index(np_, mp)])


def assemble_fiber(
    params: ChannelParams,
    proj: ProjectedPotential,
    theta: float,
    n_hermite: int,
    m_max: int,
    m_offset: int = 0,
) -> FiberMatrix:
    """Assemble the dense Hermitian fiber matrix at Bloch phase theta.

    The projection must cover the requested truncation: proj.nmax + 1 >=
    n_hermite and proj.mfourier >= 2 * m_max.  theta is restricted to
    [-1/2, 1/2]; use the 1-periodicity of the spectrum for values outside.
    """
    if abs(theta) > 0.5 + 1e-12:
        raise ValueError("theta must lie in [-1/2, 1/2]")
    if n_hermite < 1 or m_max < 0:
        raise ValueError("need n_hermite >= 1 and m_max >= 0")
    if proj.nmax + 1 < n_hermite:
        raise ValueError(
            f"projection covers Hermite levels <= {proj.nmax}, need {n_hermite - 1}"
        )
    if proj.mfourier < 2 * m_max:
        raise ValueError(
            f"projection Fourier cutoff {proj.mfourier} < 2*m_max = {2 * m_max}"
        )
    if abs(proj.alpha - params.alpha) > 1e-12 * max(1.0, params.alpha):
        raise ValueError("projection was computed for a different alpha")

    N = n_hermite
    ms = np.arange(-m_max, m_max + 1) + m_offset
    width = ms.size
    dim = N * width
    alpha = params.alpha

    # potential part: block (mu, nu) of the Toeplitz structure in m
    kdiff = ms[:, None] - ms[None, :]
    pot = proj.coeffs[:N, :N, kdiff + proj.mfourier]  # (n, n', mu, nu)
    h = np.transpose(pot, (2, 0, 3, 1)).reshape(dim, dim).astype(complex)

    diag = (alpha * (2.0 * np.arange(N) + 1.0))[None, :] + ((ms + theta) ** 2)[:, None]
    h[np.arange(dim), np.arange(dim)] += diag.ravel()

    # magnetic ladder coupling B sqrt(2(n+1)/alpha) (m+theta) between n and n+1
    ladder = params.B * np.sqrt(2.0 * np.arange(1, N) / alpha)
    for j, m in enumerate(ms):
        base = j * N
        rows = base + np.arange(N - 1)
        h[rows, rows + 1] += ladder * (m + theta)
        h[rows + 1, rows] += ladder * (m + theta)

    h = 0.5 * (h + h.conj().T)
    dev = float(np.max(np.abs(h - h.conj().T)))
    assert dev <= _HERMITICITY_TOL, f"fiber matrix not Hermitian: deviation {dev:.3e}"
    return FiberMatrix(
        params=params,
        theta=float(theta),
        n_hermite=N,
        m_max=m_max,
        m_offset=m_offset,
        entries=h,
    )


def eigenvalues_fiber(mat: FiberMatrix, count: int | None = None) -> np.ndarray:
    """Ascending eigenvalues of the fiber (the lowest ``count`` if given)."""
    entries = mat.entries
    if np.iscomplexobj(entries) and not entries.imag.any():
        # real-coefficient potentials give exactly real symmetric fibers;
        # the real solver is about four times faster than the Hermitian one
        entries = np.ascontiguousarray(entries.real)
    try:
        vals = scipy.linalg.eigh(entries, eigvals_only=True)
    except scipy.linalg.LinAlgError as exc:
        path = _dump_matrix(mat.entries)
        raise EigensolverError(f"fiber eigensolver failed at theta={mat.theta}", path) from exc
    return vals[:count] if count is not None else vals


def _dump_matrix(entries: np.ndarray) -> str:
    fd, path = tempfile.mkstemp(prefix="fiber_matrix_", suffix=".csv")
    with open(fd, "w") as fh:
        fh.write("row,col,re,im\n")
        for i in range(entries.shape[0]):
            for j in range(entries.shape[1]):
                v = entries[i, j]
                fh.write(f"{i},{j},{v.real!r},{v.imag!r}\n")
    return path


@dataclass(frozen=True)
class ResolventBoundCheck:
    """Closed-form check of the complex-Bloch-phase resolvent bound.

    For theta = 1/2 + i theta2 the unperturbed fiber eigenvalues continue to
    E_n(m + theta) = alpha (2n+1) + beta (m + 1/2 + i theta2)^2, so

        || (H_0(theta) + 1)^{-1} ||^2 = sup_{n,m} 1 / |E_n + 1|^2

    which the bound 1 / (beta^2 theta2^2) must dominate.
    """

    theta2: float
    sup_value: float
    bound: float
    passed: bool
    argmax: tuple[int, int]


def complex_theta_resolvent_bound(
    params: ChannelParams,
    theta2: float,
    n_range: int = 64,
    m_range: int = 64,
) -> ResolventBoundCheck:
    if theta2 <= 0.0:
        raise ValueError("theta2 must be > 0")
    alpha, beta = params.alpha, params.beta
    best = 0.0
    arg = (0, 0)
    for n in range(n_range + 1):
        for m in range(-m_range, m_range + 1):
            z = complex(m + 0.5, theta2)
            denom = abs(alpha * (2 * n + 1) + beta * z * z + 1.0) ** 2
            val = 1.0 / denom
            if val > best:
                best = val
                arg = (n, m)
    bound = 1.0 / (beta * theta2) ** 2
    return ResolventBoundCheck(
        theta2=float(theta2),
        sup_value=best,
        bound=bound,
        passed=bool(best <= bound * (1.0 + 1e-12)),
        argmax=arg,
    )
