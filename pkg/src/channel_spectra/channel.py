"""Physical parameters and potential descriptors for the magnetic channel.

The model Hamiltonian is

    H = -d_y^2 + (-i d_x + B y)^2 + omega^2 y^2 + W(x, y)

with field strength B >= 0 and confinement omega > 0.  Everything downstream
is phrased through the derived constants

    alpha = sqrt(B^2 + omega^2),   beta = omega^2 / alpha^2,   mu = B / alpha^2,

so that beta + B*mu = 1 and the unperturbed dispersion in the longitudinal
momentum p is alpha*(2n+1) + beta*p^2.

Periodic potentials have the period fixed to 2*pi in x.  A channel with
period l rescales onto this one via (x, y) -> (l x / (2 pi), l y / (2 pi)),
which maps (B, omega, W) -> (c B, c omega, c^2 W) with c = (2 pi / l)^2; only
the 2*pi normalization is implemented.  Fourier convention throughout:

    W(x) = sum_k c_k exp(i k x),       c_{-k} = conj(c_k)  for real W.

Potential kinds split into x-periodic ones (usable by the Bloch fiber and
band modules) and localized ones (classical scattering, transport
certificates).  All descriptor types are immutable after construction and
safe to share across threads or worker processes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import ClassVar, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "ChannelParams",
    "derive_params",
    "Potential",
    "ZeroPotential",
    "FourierXPotential",
    "SeparableFourierPotential",
    "TransverseProfilePotential",
    "GaussianBumpPotential",
    "GridSampledPotential",
    "ConstantProfile",
    "GaussianProfile",
    "PolynomialProfile",
    "PotentialBounds",
    "evaluate_potential",
    "potential_norm_estimates",
    "potential_to_dict",
    "potential_from_dict",
    "grid_potential_from_csv",
]


@dataclass(frozen=True)
class ChannelParams:
    """Field strength, confinement and the derived channel constants."""

    B: float
    omega: float
    alpha: float
    beta: float
    mu: float


def derive_params(B: float, omega: float) -> ChannelParams:
    """Derive (alpha, beta, mu) from the field B >= 0 and confinement omega > 0.

    alpha = sqrt(B^2 + omega^2) is half the cyclotron frequency of the
    confined orbit, beta = omega^2/alpha^2 the dispersion flattening factor
    and mu = B/alpha^2 the guiding-center weight.
    """
    B = float(B)
    omega = float(omega)
    if not (math.isfinite(B) and math.isfinite(omega)):
        raise ValueError("B and omega must be finite")
    if B < 0.0:
        raise ValueError("B must be >= 0")
    if omega <= 0.0:
        raise ValueError("omega must be > 0")
    alpha_sq = B * B + omega * omega
    return ChannelParams(
        B=B,
        omega=omega,
        alpha=math.sqrt(alpha_sq),
        beta=omega * omega / alpha_sq,
        mu=B / alpha_sq,
    )


# ---------------------------------------------------------------------------
# transverse profiles


@dataclass(frozen=True)
class ConstantProfile:
    value: float = 1.0

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return np.full_like(y, self.value)

    def derivative(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def second_derivative(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    @property
    def is_constant(self) -> bool:
        return True

    def sup_abs(self) -> float:
        return abs(self.value)

    def sup_abs_derivative(self) -> float:
        return 0.0

    def sup_abs_second(self) -> float:
        return 0.0

    def to_dict(self) -> dict:
        return {"shape": "constant", "value": self.value}


@dataclass(frozen=True)
class GaussianProfile:
    """g(y) = exp(-y^2 / (2 sigma^2))."""

    sigma: float = 1.0

    def __post_init__(self):
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be positive and finite")

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return np.exp(-(y * y) / (2.0 * self.sigma**2))

    def derivative(self, y):
        y = np.asarray(y, dtype=float)
        return -(y / self.sigma**2) * self(y)

    def second_derivative(self, y):
        y = np.asarray(y, dtype=float)
        s2 = self.sigma**2
        return ((y * y) / s2 - 1.0) / s2 * self(y)

    @property
    def is_constant(self) -> bool:
        return False

    def sup_abs(self) -> float:
        return 1.0

    def sup_abs_derivative(self) -> float:
        # |g'| peaks at y = sigma with value exp(-1/2)/sigma
        return math.exp(-0.5) / self.sigma

    def sup_abs_second(self) -> float:
        # |g''| peaks at y = 0 with value 1/sigma^2
        return 1.0 / self.sigma**2

    def to_dict(self) -> dict:
        return {"shape": "gaussian", "sigma": self.sigma}


@dataclass(frozen=True)
class PolynomialProfile:
    """g(y) = sum_j coeffs[j] * y^j.  Unbounded in y unless constant."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs: Sequence[float]):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in coeffs))
        if not self.coeffs:
            raise ValueError("polynomial profile needs at least one coefficient")

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return np.polynomial.polynomial.polyval(y, np.asarray(self.coeffs))

    def derivative(self, y):
        y = np.asarray(y, dtype=float)
        der = np.polynomial.polynomial.polyder(np.asarray(self.coeffs))
        return np.polynomial.polynomial.polyval(y, der)

    def second_derivative(self, y):
        y = np.asarray(y, dtype=float)
        der2 = np.polynomial.polynomial.polyder(np.asarray(self.coeffs), 2)
        return np.polynomial.polynomial.polyval(y, der2)

    @property
    def is_constant(self) -> bool:
        return all(c == 0.0 for c in self.coeffs[1:])

    def sup_abs(self) -> float:
        return abs(self.coeffs[0]) if self.is_constant else math.inf

    def sup_abs_derivative(self) -> float:
        if all(c == 0.0 for c in self.coeffs[2:]):
            return abs(self.coeffs[1]) if len(self.coeffs) > 1 else 0.0
        return math.inf

    def sup_abs_second(self) -> float:
        if all(c == 0.0 for c in self.coeffs[3:]):
            return 2.0 * abs(self.coeffs[2]) if len(self.coeffs) > 2 else 0.0
        return math.inf

    def to_dict(self) -> dict:
        return {"shape": "polynomial", "coeffs": list(self.coeffs)}


_PROFILE_SHAPES = {
    "constant": lambda d: ConstantProfile(float(d.get("value", 1.0))),
    "gaussian": lambda d: GaussianProfile(float(d.get("sigma", 1.0))),
    "polynomial": lambda d: PolynomialProfile(d["coeffs"]),
}


def _profile_from_dict(d: Mapping) -> ConstantProfile | GaussianProfile | PolynomialProfile:
    shape = d.get("shape")
    if shape not in _PROFILE_SHAPES:
        raise ValueError(f"unknown profile shape {shape!r}")
    return _PROFILE_SHAPES[shape](d)


# ---------------------------------------------------------------------------
# norm estimates


@dataclass(frozen=True)
class PotentialBounds:
    """Certified upper bounds on sup norms of W and its weighted derivatives.

    w0       : ||W||_inf
    w0_prime : ||x dW/dx||_inf  (infinite for potentials whose x-dependence
               does not decay, e.g. nonconstant periodic ones)
    dxx, dyy, dxy : sup norms of the second derivatives
    x2_dxx   : ||x^2 d^2 W/dx^2||_inf
    method   : "analytic" for closed-form bounds, "grid" when a padded grid
               maximum was used for at least one entry
    """

    w0: float
    w0_prime: float
    dxx: float
    dyy: float
    dxy: float
    x2_dxx: float
    method: str = "analytic"


def _certified_grid_sup(values: np.ndarray, step: float) -> float:
    """Grid maximum of |values| padded by a finite-difference Lipschitz term.

    The padding L*step/2 with L estimated from first differences makes the
    estimate an upper bound up to curvature of order step^2; inputs are
    sampled densely enough that this is far below the quantities bounded.
    """
    absvals = np.abs(np.asarray(values, dtype=float))
    lipschitz = float(np.max(np.abs(np.diff(values)))) / step if values.size > 1 else 0.0
    return float(np.max(absvals)) + 0.5 * lipschitz * step


# ---------------------------------------------------------------------------
# potential kinds


class Potential:
    """Base class for potential descriptors.

    Subclasses provide vectorized ``evaluate``, an analytic or
    finite-difference ``gradient``, certified ``norm_estimates`` and a
    JSON-compatible ``to_dict``.  Instances are immutable.
    """

    kind: ClassVar[str] = ""
    periodic_in_x: ClassVar[bool] = False

    def evaluate(self, x, y):
        raise NotImplementedError

    def __call__(self, x, y):
        return self.evaluate(x, y)

    def gradient(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        """(dW/dx, dW/dy), by central differences unless overridden."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        h = 1e-6
        wx = (self.evaluate(x + h, y) - self.evaluate(x - h, y)) / (2.0 * h)
        wy = (self.evaluate(x, y + h) - self.evaluate(x, y - h)) / (2.0 * h)
        return wx, wy

    def norm_estimates(self) -> PotentialBounds:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def cache_key(self) -> tuple:
        raise NotImplementedError


def _as_xy(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = x.ndim == 0 and y.ndim == 0
    xb, yb = np.broadcast_arrays(x, y)
    return xb, yb, scalar


def _ret(values: np.ndarray, scalar: bool):
    return float(values) if scalar else values


@dataclass(frozen=True)
class ZeroPotential(Potential):
    kind: ClassVar[str] = "zero"
    periodic_in_x: ClassVar[bool] = True

    def evaluate(self, x, y):
        xb, _, scalar = _as_xy(x, y)
        return _ret(np.zeros_like(xb), scalar)

    def gradient(self, x, y):
        xb, _, _ = _as_xy(x, y)
        return np.zeros_like(xb), np.zeros_like(xb)

    def norm_estimates(self) -> PotentialBounds:
        return PotentialBounds(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    def to_dict(self) -> dict:
        return {"kind": self.kind}

    def cache_key(self) -> tuple:
        return (self.kind,)


def _canonical_coeffs(coeffs: Mapping[int, complex]) -> tuple[tuple[int, complex], ...]:
    """Validate c_{-k} = conj(c_k) and return a sorted, conjugate-exact tuple."""
    cleaned: dict[int, complex] = {}
    for k, v in coeffs.items():
        k = int(k)
        v = complex(v)
        if v != 0.0:
            cleaned[k] = v
    scale = max((abs(v) for v in cleaned.values()), default=0.0)
    tol = 1e-12 * max(scale, 1.0)
    for k, v in cleaned.items():
        other = cleaned.get(-k, 0.0)
        if abs(other - v.conjugate()) > tol:
            raise ValueError(f"Fourier coefficients must satisfy c_-k = conj(c_k); violated at k={k}")
    # symmetrize exactly so evaluation is real to round-off
    out: dict[int, complex] = {}
    for k in sorted(cleaned):
        if k < 0:
            continue
        if k == 0:
            out[0] = complex(cleaned[0].real, 0.0)
        else:
            ck = 0.5 * (cleaned[k] + cleaned.get(-k, cleaned[k].conjugate()).conjugate())
            out[k] = ck
            out[-k] = ck.conjugate()
    return tuple(sorted(out.items()))


def _fourier_eval(coeffs: tuple[tuple[int, complex], ...], x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    for k, c in coeffs:
        if k == 0:
            out = out + c.real
        elif k > 0:
            out = out + 2.0 * (c.real * np.cos(k * x) - c.imag * np.sin(k * x))
    return out


def _fourier_eval_deriv(coeffs, x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    for k, c in coeffs:
        if k > 0:
            out = out + 2.0 * k * (-c.real * np.sin(k * x) - c.imag * np.cos(k * x))
    return out


def _fourier_sup(coeffs) -> tuple[float, bool]:
    """(sup |f|, exact) for f(x) = sum c_k e^{ikx}.

    Single-harmonic profiles (optionally with a constant term) admit the
    closed form |c_0| + 2|c_k|; otherwise a padded grid maximum is used.
    """
    nonzero = [(k, c) for k, c in coeffs if k > 0]
    c0 = next((c.real for k, c in coeffs if k == 0), 0.0)
    if not nonzero:
        return abs(c0), True
    if len(nonzero) == 1:
        k, c = nonzero[0]
        return abs(c0) + 2.0 * abs(c), True
    kmax = max(k for k, _ in nonzero)
    n = max(4096, 64 * kmax)
    x = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return _certified_grid_sup(_fourier_eval(coeffs, x), 2.0 * math.pi / n), False


def _coeffs_to_dict(coeffs) -> dict:
    return {str(k): [c.real, c.imag] for k, c in coeffs}


def _coeffs_from_dict(d: Mapping) -> dict[int, complex]:
    out = {}
    for k, v in d.items():
        if isinstance(v, (list, tuple)):
            out[int(k)] = complex(v[0], v[1])
        else:
            out[int(k)] = complex(v)
    return out


@dataclass(frozen=True)
class FourierXPotential(Potential):
    """W(x) = sum_k c_k exp(i k x), 2*pi-periodic, independent of y."""

    coeffs: tuple[tuple[int, complex], ...]
    kind: ClassVar[str] = "fourier_x"
    periodic_in_x: ClassVar[bool] = True

    def __init__(self, coeffs: Mapping[int, complex]):
        object.__setattr__(self, "coeffs", _canonical_coeffs(coeffs))

    @classmethod
    def from_cosines(cls, amplitudes: Mapping[int, float]) -> "FourierXPotential":
        """Build sum_k a_k cos(k x) (k >= 0); a_0 is the constant term."""
        coeffs: dict[int, complex] = {}
        for k, a in amplitudes.items():
            k = int(k)
            if k == 0:
                coeffs[0] = complex(a)
            elif k > 0:
                coeffs[k] = complex(a) / 2.0
                coeffs[-k] = complex(a) / 2.0
            else:
                raise ValueError("cosine harmonics must have k >= 0")
        return cls(coeffs)

    def coeff(self, k: int) -> complex:
        return dict(self.coeffs).get(int(k), 0.0 + 0.0j)

    def evaluate(self, x, y):
        xb, _, scalar = _as_xy(x, y)
        return _ret(_fourier_eval(self.coeffs, xb), scalar)

    def gradient(self, x, y):
        xb, _, _ = _as_xy(x, y)
        return _fourier_eval_deriv(self.coeffs, xb), np.zeros_like(xb)

    def norm_estimates(self) -> PotentialBounds:
        w0, exact = _fourier_sup(self.coeffs)
        nonconst = any(k != 0 for k, _ in self.coeffs)
        dxx = sum(2.0 * k * k * abs(c) for k, c in self.coeffs if k > 0)
        return PotentialBounds(
            w0=w0,
            w0_prime=math.inf if nonconst else 0.0,
            dxx=dxx,
            dyy=0.0,
            dxy=0.0,
            x2_dxx=math.inf if nonconst else 0.0,
            method="analytic" if exact else "grid",
        )

    def to_dict(self) -> dict:
        return {"kind": self.kind, "coeffs": _coeffs_to_dict(self.coeffs)}

    def cache_key(self) -> tuple:
        return (self.kind, self.coeffs)


@dataclass(frozen=True)
class SeparableFourierPotential(Potential):
    """W(x, y) = f(x) g(y) with f a 2*pi-periodic Fourier sum and g a profile."""

    coeffs: tuple[tuple[int, complex], ...]
    profile: ConstantProfile | GaussianProfile | PolynomialProfile
    kind: ClassVar[str] = "fourier_x_profile"
    periodic_in_x: ClassVar[bool] = True

    def __init__(self, coeffs: Mapping[int, complex], profile) -> None:
        object.__setattr__(self, "coeffs", _canonical_coeffs(coeffs))
        object.__setattr__(self, "profile", profile)

    def evaluate(self, x, y):
        xb, yb, scalar = _as_xy(x, y)
        return _ret(_fourier_eval(self.coeffs, xb) * self.profile(yb), scalar)

    def gradient(self, x, y):
        xb, yb, _ = _as_xy(x, y)
        g = self.profile(yb)
        return (
            _fourier_eval_deriv(self.coeffs, xb) * g,
            _fourier_eval(self.coeffs, xb) * self.profile.derivative(yb),
        )

    def norm_estimates(self) -> PotentialBounds:
        fsup, exact = _fourier_sup(self.coeffs)
        fd1 = sum(2.0 * k * abs(c) for k, c in self.coeffs if k > 0)
        fd2 = sum(2.0 * k * k * abs(c) for k, c in self.coeffs if k > 0)
        gsup = self.profile.sup_abs()
        nonconst_x = any(k != 0 for k, _ in self.coeffs)
        return PotentialBounds(
            w0=fsup * gsup,
            w0_prime=0.0 if not nonconst_x else (math.inf if fsup * gsup > 0 else 0.0),
            dxx=fd2 * gsup,
            dyy=fsup * self.profile.sup_abs_second(),
            dxy=fd1 * self.profile.sup_abs_derivative(),
            x2_dxx=math.inf if nonconst_x and fd2 * gsup > 0 else 0.0,
            method="analytic" if exact else "grid",
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "coeffs": _coeffs_to_dict(self.coeffs),
            "profile": self.profile.to_dict(),
        }

    def cache_key(self) -> tuple:
        return (self.kind, self.coeffs, str(self.profile.to_dict()))


@dataclass(frozen=True)
class TransverseProfilePotential(Potential):
    """W(x, y) = amplitude * g(y): no x-dependence, so ||x dW/dx|| = 0 exactly."""

    profile: ConstantProfile | GaussianProfile | PolynomialProfile
    amplitude: float = 1.0
    kind: ClassVar[str] = "profile_y"
    periodic_in_x: ClassVar[bool] = True

    def evaluate(self, x, y):
        xb, yb, scalar = _as_xy(x, y)
        return _ret(self.amplitude * self.profile(yb) * np.ones_like(xb), scalar)

    def gradient(self, x, y):
        xb, yb, _ = _as_xy(x, y)
        return np.zeros_like(xb), self.amplitude * self.profile.derivative(yb)

    def norm_estimates(self) -> PotentialBounds:
        a = abs(self.amplitude)
        return PotentialBounds(
            w0=a * self.profile.sup_abs(),
            w0_prime=0.0,
            dxx=0.0,
            dyy=a * self.profile.sup_abs_second(),
            dxy=0.0,
            x2_dxx=0.0,
        )

    def to_dict(self) -> dict:
        return {"kind": self.kind, "profile": self.profile.to_dict(), "amplitude": self.amplitude}

    def cache_key(self) -> tuple:
        return (self.kind, self.amplitude, str(self.profile.to_dict()))


@dataclass(frozen=True)
class _Bump:
    amplitude: float
    x0: float
    y0: float
    width: float

    def __post_init__(self):
        if not (self.width > 0.0 and math.isfinite(self.width)):
            raise ValueError("bump width must be positive and finite")


@dataclass(frozen=True)
class GaussianBumpPotential(Potential):
    """Sum of isotropic Gaussian bumps a * exp(-((x-x0)^2+(y-y0)^2)/(2 s^2)).

    Localized in both directions; not periodic in x, so usable for classical
    scattering and transport certificates but rejected by the Bloch modules.
    """

    bumps: tuple[_Bump, ...]
    kind: ClassVar[str] = "gaussian_bumps"
    periodic_in_x: ClassVar[bool] = False

    def __init__(self, bumps: Iterable[Sequence[float]]):
        parsed = tuple(
            b if isinstance(b, _Bump) else _Bump(float(b[0]), float(b[1]), float(b[2]), float(b[3]))
            for b in bumps
        )
        if not parsed:
            raise ValueError("need at least one bump")
        object.__setattr__(self, "bumps", parsed)

    def evaluate(self, x, y):
        xb, yb, scalar = _as_xy(x, y)
        out = np.zeros_like(xb)
        for b in self.bumps:
            r2 = (xb - b.x0) ** 2 + (yb - b.y0) ** 2
            out = out + b.amplitude * np.exp(-r2 / (2.0 * b.width**2))
        return _ret(out, scalar)

    def gradient(self, x, y):
        xb, yb, _ = _as_xy(x, y)
        wx = np.zeros_like(xb)
        wy = np.zeros_like(xb)
        for b in self.bumps:
            r2 = (xb - b.x0) ** 2 + (yb - b.y0) ** 2
            g = b.amplitude * np.exp(-r2 / (2.0 * b.width**2))
            wx = wx - (xb - b.x0) / b.width**2 * g
            wy = wy - (yb - b.y0) / b.width**2 * g
        return wx, wy

    def _box(self) -> tuple[float, float, float, float]:
        # 10-sigma box: boundary values are below 2e-22 of the amplitudes
        pad = 10.0 * max(b.width for b in self.bumps)
        xs = [b.x0 for b in self.bumps]
        ys = [b.y0 for b in self.bumps]
        return min(xs) - pad, max(xs) + pad, min(ys) - pad, max(ys) + pad

    def norm_estimates(self) -> PotentialBounds:
        if len(self.bumps) == 1 and self.bumps[0].x0 == 0.0:
            b = self.bumps[0]
            a = abs(b.amplitude)
            # |x dW/dx| = a * u^2 exp(-u^2/2) with u = x/s, peak 2/e;
            # |x^2 d^2W/dx^2| = a * t|t-1| exp(-t/2) with t = u^2, peak at t = (5+sqrt(17))/2
            t = 0.5 * (5.0 + math.sqrt(17.0))
            return PotentialBounds(
                w0=a,
                w0_prime=a * 2.0 / math.e,
                dxx=a / b.width**2,
                dyy=a / b.width**2,
                dxy=a / (math.e * b.width**2),
                x2_dxx=a * t * (t - 1.0) * math.exp(-0.5 * t),
                method="analytic",
            )
        w0 = _grid_sup_weighted(self, None)
        w0p = _grid_sup_weighted(self, lambda xg: xg, first="x")
        a_over_s2 = sum(abs(b.amplitude) / b.width**2 for b in self.bumps)
        return PotentialBounds(
            w0=w0,
            w0_prime=w0p,
            dxx=a_over_s2,
            dyy=a_over_s2,
            dxy=a_over_s2 / math.e,
            x2_dxx=_grid_sup_weighted(self, lambda xg: xg * xg, second="xx"),
            method="grid",
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "bumps": [[b.amplitude, b.x0, b.y0, b.width] for b in self.bumps],
        }

    def cache_key(self) -> tuple:
        return (self.kind, self.bumps)


def _grid_sup_weighted(pot: GaussianBumpPotential, weight, first: str | None = None, second: str | None = None) -> float:
    """Padded grid sup of |weight(x) * D W| over a box containing all bumps.

    The 10-sigma box makes the truncated tail negligible against the interior
    maximum for the Gaussian kinds this is used with.
    """
    xlo, xhi, ylo, yhi = pot._box()
    nx = max(512, int((xhi - xlo) / min(b.width for b in pot.bumps) * 24))
    ny = max(128, int((yhi - ylo) / min(b.width for b in pot.bumps) * 12))
    nx = min(nx, 4096)
    ny = min(ny, 1024)
    xg = np.linspace(xlo, xhi, nx)
    yg = np.linspace(ylo, yhi, ny)
    X, Y = np.meshgrid(xg, yg, indexing="ij")
    if second == "xx":
        h = 1e-4 * min(b.width for b in pot.bumps)
        vals = (pot.evaluate(X + h, Y) - 2.0 * pot.evaluate(X, Y) + pot.evaluate(X - h, Y)) / h**2
    elif first == "x":
        vals = pot.gradient(X, Y)[0]
    else:
        vals = pot.evaluate(X, Y)
    if weight is not None:
        vals = weight(X) * vals
    step = xg[1] - xg[0]
    lip_x = np.max(np.abs(np.diff(vals, axis=0))) / step if nx > 1 else 0.0
    step_y = yg[1] - yg[0]
    lip_y = np.max(np.abs(np.diff(vals, axis=1))) / step_y if ny > 1 else 0.0
    return float(np.max(np.abs(vals)) + 0.5 * (lip_x * step + lip_y * step_y))


class GridSampledPotential(Potential):
    """Bilinear interpolation of tabulated samples on a rectangular grid.

    Outside the covered rectangle the potential is 0 (localized convention);
    ``clipped_mask`` reports which evaluation points fell outside.
    """

    kind: ClassVar[str] = "grid"
    periodic_in_x: ClassVar[bool] = False

    def __init__(self, x: Sequence[float], y: Sequence[float], values: np.ndarray):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        values = np.asarray(values, dtype=float)
        if x.ndim != 1 or y.ndim != 1 or values.shape != (x.size, y.size):
            raise ValueError("values must have shape (len(x), len(y))")
        if x.size < 2 or y.size < 2:
            raise ValueError("grid needs at least 2 points per axis")
        if np.any(np.diff(x) <= 0) or np.any(np.diff(y) <= 0):
            raise ValueError("grid axes must be strictly increasing")
        for arr in (x, y, values):
            arr.setflags(write=False)
        self.x = x
        self.y = y
        self.values = values
        from scipy.interpolate import RegularGridInterpolator

        self._interp = RegularGridInterpolator(
            (x, y), values, method="linear", bounds_error=False, fill_value=0.0
        )

    def evaluate(self, x, y):
        xb, yb, scalar = _as_xy(x, y)
        pts = np.stack([xb.ravel(), yb.ravel()], axis=-1)
        out = self._interp(pts).reshape(xb.shape)
        return _ret(out, scalar)

    def clipped_mask(self, x, y):
        """True where (x, y) lies outside the tabulated rectangle."""
        xb, yb, scalar = _as_xy(x, y)
        m = (
            (xb < self.x[0]) | (xb > self.x[-1]) | (yb < self.y[0]) | (yb > self.y[-1])
        )
        return bool(m) if scalar else m

    def gradient(self, x, y):
        xb, yb, _ = _as_xy(x, y)
        hx = float(np.min(np.diff(self.x))) * 0.5
        hy = float(np.min(np.diff(self.y))) * 0.5
        wx = (self.evaluate(xb + hx, yb) - self.evaluate(xb - hx, yb)) / (2.0 * hx)
        wy = (self.evaluate(xb, yb + hy) - self.evaluate(xb, yb - hy)) / (2.0 * hy)
        return wx, wy

    def norm_estimates(self) -> PotentialBounds:
        # a bilinear interpolant attains its sup at the nodes
        w0 = float(np.max(np.abs(self.values)))
        dx = np.diff(self.x)[:, None]
        slopes = np.abs(np.diff(self.values, axis=0)) / dx
        xedge = np.maximum(np.abs(self.x[:-1]), np.abs(self.x[1:]))[:, None]
        # the x-slope varies linearly in y inside a cell, so cell sup is at a y-edge
        cell_slope = np.maximum(slopes[:, :-1], slopes[:, 1:])
        w0p = float(np.max(xedge * cell_slope))
        dy = np.diff(self.y)[None, :]
        cross = np.abs(np.diff(np.diff(self.values, axis=0), axis=1)) / (dx * dy)
        dxy = float(np.max(cross)) if cross.size else 0.0
        # piecewise-bilinear data has no classical second derivatives
        return PotentialBounds(
            w0=w0, w0_prime=w0p, dxx=math.inf, dyy=math.inf, dxy=dxy, x2_dxx=math.inf,
            method="grid",
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "x": list(self.x),
            "y": list(self.y),
            "values": [list(row) for row in self.values],
        }

    def cache_key(self) -> tuple:
        return (self.kind, self.x.tobytes(), self.y.tobytes(), self.values.tobytes())

    def __repr__(self) -> str:
        return f"GridSampledPotential(nx={self.x.size}, ny={self.y.size})"


def grid_potential_from_csv(path) -> GridSampledPotential:
    """Read (x, y, W) triples covering a full rectangular grid."""
    samples: dict[tuple[float, float], float] = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if len(row) != 3:
                raise ValueError(f"expected 3 columns (x, y, W), got {len(row)}")
            try:
                x, y, w = (float(c) for c in row)
            except ValueError:
                if samples:
                    raise ValueError(f"non-numeric row {row!r}")
                continue  # header line
            samples[(x, y)] = w
    if not samples:
        raise ValueError("no samples in grid CSV")
    xs = np.array(sorted({p[0] for p in samples}))
    ys = np.array(sorted({p[1] for p in samples}))
    if len(samples) != xs.size * ys.size:
        raise ValueError("grid CSV does not cover a full rectangle")
    values = np.empty((xs.size, ys.size))
    for (x, y), w in samples.items():
        values[np.searchsorted(xs, x), np.searchsorted(ys, y)] = w
    return GridSampledPotential(xs, ys, values)


# ---------------------------------------------------------------------------
# module-level wrappers and serialization


def evaluate_potential(spec: Potential, x, y):
    """W(x, y), vectorized over broadcastable x, y."""
    return spec.evaluate(x, y)


def potential_norm_estimates(spec: Potential) -> PotentialBounds:
    return spec.norm_estimates()


def potential_to_dict(spec: Potential) -> dict:
    return spec.to_dict()


_KINDS: dict[str, type] = {
    cls.kind: cls
    for cls in (
        ZeroPotential,
        FourierXPotential,
        SeparableFourierPotential,
        TransverseProfilePotential,
        GaussianBumpPotential,
        GridSampledPotential,
    )
}


def potential_from_dict(d: Mapping) -> Potential:
    kind = d.get("kind")
    if kind not in _KINDS:
        raise ValueError(f"unknown potential kind {kind!r}")
    if kind == "zero":
        return ZeroPotential()
    if kind == "fourier_x":
        return FourierXPotential(_coeffs_from_dict(d["coeffs"]))
    if kind == "fourier_x_profile":
        return SeparableFourierPotential(_coeffs_from_dict(d["coeffs"]), _profile_from_dict(d["profile"]))
    if kind == "profile_y":
        return TransverseProfilePotential(_profile_from_dict(d["profile"]), float(d.get("amplitude", 1.0)))
    if kind == "gaussian_bumps":
        return GaussianBumpPotential(d["bumps"])
    return GridSampledPotential(d["x"], d["y"], np.asarray(d["values"], dtype=float))
