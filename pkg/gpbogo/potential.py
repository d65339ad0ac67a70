"""
Radial, nonnegative, compactly supported pair potentials.

A RadialPotential is immutable; every operation on it is a pure function, so
instances can be shared freely between threads.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from gpbogo.utils.errors import PreconditionError
from gpbogo.utils.logging_config import get_logger
from gpbogo.utils.quadrature import piecewise_radial_transform, quad

logger = get_logger(__name__)

SQUARE_WELL = "square_well"
SMOOTH_BUMP = "smooth_bump"
TABULATED = "tabulated"
KINDS = (SQUARE_WELL, SMOOTH_BUMP, TABULATED)

# Below this value of kR the square-well transform switches to its Taylor series.
SERIES_KR = 1e-3


@dataclass(frozen=True)
class RadialPotential:
    """
    Radial potential V(r) >= 0 with V(r) = 0 for r > R.

    Args:
        kind (str): One of "square_well", "smooth_bump", "tabulated".
        R (float): Support radius.
        V0 (float): Height of the square well or of the bump at r = 0.
        samples (ndarray): (n, 2) array of (r, V(r)) for the tabulated kind,
            interpolated by a monotone piecewise cubic.
    """

    kind: str
    R: float
    V0: float = 0.0
    samples: np.ndarray = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"Unknown potential kind {self.kind!r}.")
        if not (np.isfinite(self.R) and self.R > 0):
            raise PreconditionError(f"Support radius must be positive, got {self.R}.")
        if self.kind == TABULATED:
            samples = np.asarray(self.samples, dtype=float)
            if samples.ndim != 2 or samples.shape[1] != 2 or len(samples) < 2:
                raise PreconditionError("Tabulated potential needs (n >= 2, 2) samples.")
            r, v = samples.T
            if np.any(np.diff(r) <= 0) or r[0] < 0:
                raise PreconditionError("Sample radii must be increasing and >= 0.")
            if r[-1] > self.R:
                raise PreconditionError(
                    f"Sample radius {r[-1]} lies beyond the support radius {self.R}."
                )
            if not np.all(np.isfinite(v)) or np.any(v < 0):
                raise PreconditionError("Tabulated values must be finite and >= 0.")
            samples.setflags(write=False)
            object.__setattr__(self, "samples", samples)
            object.__setattr__(self, "_interp", PchipInterpolator(r, v))
        else:
            if not (np.isfinite(self.V0) and self.V0 >= 0):
                raise PreconditionError(f"V0 must be finite and >= 0, got {self.V0}.")

    @property
    def is_zero(self):
        if self.kind == TABULATED:
            return not np.any(self.samples[:, 1])
        return self.V0 == 0

    @property
    def breakpoints(self):
        """Radii where the potential may lose smoothness, from 0 to R."""
        if self.kind == TABULATED:
            r = self.samples[:, 0]
            points = np.concatenate([[0.0], r, [self.R]])
            return np.unique(points)
        return np.array([0.0, self.R])

    def __call__(self, r):
        shape = np.shape(r)
        r = np.atleast_1d(np.asarray(r, dtype=float)).ravel()
        out = np.zeros_like(r)
        inside = r <= self.R
        if self.kind == SQUARE_WELL:
            out[inside] = self.V0
        elif self.kind == SMOOTH_BUMP:
            inner = r < self.R
            x = r[inner] / self.R
            out[inner] = self.V0 * np.exp(1.0 - 1.0 / (1.0 - x * x))
        else:
            r_first, r_last = self.samples[0, 0], self.samples[-1, 0]
            body = (r >= r_first) & (r <= r_last)
            out[body] = self._interp(r[body])
            out[r < r_first] = self.samples[0, 1]
        return out.reshape(shape) if shape else float(out[0])

    def integral(self):
        """Returns 4*pi * int r^2 V(r) dr."""
        return float(fourier_transform(self, 0.0))

    def fourier_transform(self, k):
        return fourier_transform(self, k)

    def scaled(self, length=1.0, strength=1.0):
        return scaled(self, length, strength)


def square_well(V0, R):
    return RadialPotential(SQUARE_WELL, R=float(R), V0=float(V0))


def smooth_bump(V0, R):
    return RadialPotential(SMOOTH_BUMP, R=float(R), V0=float(V0))


def tabulated(samples, R=None):
    samples = np.asarray(samples, dtype=float)
    if R is None:
        R = float(samples[-1, 0])
    return RadialPotential(TABULATED, R=float(R), samples=samples)


def scaled(pot, length=1.0, strength=1.0):
    """
    Returns the potential r -> strength * V(r / length).

    Args:
        pot (RadialPotential): Base potential.
        length (float): Length scale, must be positive.
        strength (float): Amplitude factor, must be >= 0.
    """
    if length <= 0 or strength < 0:
        raise PreconditionError(
            f"Need length > 0 and strength >= 0, got {length}, {strength}."
        )
    if pot.kind == TABULATED:
        samples = pot.samples * np.array([length, strength])
        return RadialPotential(TABULATED, R=pot.R * length, samples=samples)
    return RadialPotential(pot.kind, R=pot.R * length, V0=pot.V0 * strength)


def _square_well_transform(V0, R, k):
    x = k * R
    out = np.empty_like(k)
    small = x < SERIES_KR
    xs = x[small]
    out[small] = 4 * np.pi * V0 * R ** 3 * (1 / 3 - xs ** 2 / 30 + xs ** 4 / 840)
    kl, xl = k[~small], x[~small]
    out[~small] = 4 * np.pi * V0 * (np.sin(xl) - xl * np.cos(xl)) / kl ** 3
    return out


def fourier_transform(pot, k):
    """
    Radial Fourier transform V^(k) = 4 pi int_0^R r^2 V(r) sin(kr)/(kr) dr.

    Args:
        pot (RadialPotential): Potential.
        k (float or ndarray): Wavenumbers, all >= 0.

    Returns:
        float or ndarray: V^(k) with the shape of k.
    """
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr < 0) or not np.all(np.isfinite(k_arr)):
        raise PreconditionError("Fourier transform needs finite k >= 0.")
    if pot.is_zero:
        out = np.zeros_like(k_arr)
    elif pot.kind == SQUARE_WELL:
        out = _square_well_transform(pot.V0, pot.R, k_arr.ravel()).reshape(k_arr.shape)
    else:
        unique, inverse = np.unique(k_arr, return_inverse=True)
        breaks = pot.breakpoints
        values = np.array(
            [piecewise_radial_transform(pot, breaks, kk) for kk in unique]
        )
        out = values[inverse].reshape(k_arr.shape)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ScaledPotential:
    """
    The interaction kappa * N^(3 beta - 1) V(N^beta r) of the N-body Hamiltonian.

    The 1/N prefactor is kept apart from the N^(3 beta) profile, so that
    ``profile`` is N^(3 beta) V(N^beta r) and ``profile_transform(k)`` equals
    V^(k / N^beta).
    """

    base: RadialPotential
    N: int
    beta: float
    kappa: float

    @property
    def prefactor(self):
        return self.kappa / self.N

    @property
    def length_scale(self):
        return float(self.N) ** (-self.beta)

    @property
    def support(self):
        return self.base.R * self.length_scale

    def profile(self, r):
        n_beta = float(self.N) ** self.beta
        return n_beta ** 3 * self.base(np.asarray(r, dtype=float) * n_beta)

    def __call__(self, r):
        return self.prefactor * self.profile(r)

    def profile_transform(self, k):
        return fourier_transform(self.base, np.asarray(k, dtype=float) * self.length_scale)

    def fourier_transform(self, k):
        return self.prefactor * self.profile_transform(k)

    def to_radial(self):
        """The scaled interaction as a RadialPotential of support R / N^beta."""
        n_beta = float(self.N) ** self.beta
        return scaled(self.base, 1.0 / n_beta, self.prefactor * n_beta ** 3)


def rescale(pot, N, beta, kappa=1.0):
    """
    Builds the scaled interaction of the N-particle Hamiltonian.

    Args:
        pot (RadialPotential): Unscaled potential V.
        N (int): Particle number, >= 1.
        beta (float): Scaling exponent in [0, 1] (1 is Gross-Pitaevskii,
            0 is mean field).
        kappa (float): Coupling constant, > 0.
    """
    if N < 1:
        raise PreconditionError(f"N must be >= 1, got {N}.")
    if not 0 <= beta <= 1:
        raise PreconditionError(f"beta must lie in [0, 1], got {beta}.")
    if kappa <= 0:
        raise PreconditionError(f"kappa must be positive, got {kappa}.")
    return ScaledPotential(base=pot, N=int(N), beta=float(beta), kappa=float(kappa))


def radial_moment(pot):
    """int_0^R r^2 V(r) dr, checked finite."""
    inner = pot.breakpoints[1:-1]
    kwargs = {"points": inner} if len(inner) else {}
    return quad(lambda r: r * r * pot(r), 0.0, pot.R, **kwargs)[0]


def scattering_length_closed_form(V0, R):
    """Scattering length R - tanh(kR)/k of the square well, k = sqrt(V0/2)."""
    if V0 == 0:
        return 0.0
    k = np.sqrt(V0 / 2.0)
    return float(R - np.tanh(k * R) / k)
