"""
Predictions of Bogoliubov theory for the dilute Bose gas.

Closed forms (dispersion, LHY, depletion) take the scattering length a0 and the
density rho directly; the finite-volume ground-state energy and the
renormalized coefficients go through the scattering and lattice modules.
"""
import re
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from gpbogo.lattice import (
    LHY_COEFFICIENT,
    bogoliubov_bracket,
    bogoliubov_lattice_sum,
    cube_shells,
    e_lambda,
)
from gpbogo.potential import RadialPotential, fourier_transform
from gpbogo.scattering import (
    born_series,
    eta_kernel,
    solve_neumann,
    solve_zero_energy,
    vf_transform,
)
from gpbogo.utils.errors import (
    DilutenessWarning,
    NegativeFourierWarning,
    NumericalError,
    PreconditionError,
)
from gpbogo.utils.logging_config import get_logger
from gpbogo.utils.quadrature import quad

logger = get_logger(__name__)

DILUTENESS_LIMIT = 1e-2
DEPLETION_COEFFICIENT = 8.0 / (3.0 * np.sqrt(np.pi))
TAU_CLAMP = 1e-14


@dataclass(frozen=True)
class DispersionParams:
    a0: float
    rho: float = None

    def __post_init__(self):
        if not self.a0 >= 0:
            raise PreconditionError(f"a0 must be >= 0, got {self.a0}.")
        if self.rho is not None and not self.rho > 0:
            raise PreconditionError(f"rho must be positive, got {self.rho}.")

    @property
    def sound_velocity(self):
        return sound_velocity(self.a0)

    def dispersion(self, p):
        return dispersion(self.a0, p)


@dataclass(frozen=True)
class OccupationList:
    """
    Finitely many excited momenta p = 2 pi n with occupation numbers n_p.

    Args:
        entries (tuple): Pairs ((n1, n2, n3), n_p) with n != 0 and n_p >= 0.
    """

    entries: tuple = ()

    def __post_init__(self):
        merged = {}
        for vector, count in self.entries:
            vector = tuple(int(v) for v in vector)
            if len(vector) != 3 or vector == (0, 0, 0):
                raise PreconditionError(f"Invalid excited momentum {vector}.")
            if int(count) != count or count < 0:
                raise PreconditionError(f"Occupation of {vector} must be in N, got {count}.")
            merged[vector] = merged.get(vector, 0) + int(count)
        object.__setattr__(self, "entries", tuple(sorted(merged.items())))

    @classmethod
    def from_mapping(cls, mapping):
        return cls(tuple(mapping.items()))

    @classmethod
    def parse(cls, text):
        """Parses "1/0/0:2,0/1/0:1" (integer vectors n, momentum 2 pi n)."""
        entries = []
        for item in filter(None, (s.strip() for s in text.split(","))):
            match = re.fullmatch(r"(-?\d+)/(-?\d+)/(-?\d+):(\d+)", item)
            if match is None:
                raise PreconditionError(f"Cannot parse occupation {item!r}.")
            *vector, count = (int(g) for g in match.groups())
            entries.append((tuple(vector), count))
        return cls(tuple(entries))

    def __add__(self, other):
        return OccupationList(self.entries + other.entries)

    def momenta(self):
        """Returns (|p|, n_p) arrays."""
        if not self.entries:
            return np.zeros(0), np.zeros(0, dtype=int)
        vectors = np.array([v for v, _ in self.entries], dtype=float)
        counts = np.array([c for _, c in self.entries])
        return 2 * np.pi * np.linalg.norm(vectors, axis=1), counts


def dispersion(a0, p):
    """sqrt(|p|^4 + 16 pi a0 |p|^2) for a momentum magnitude (or array of them)."""
    if a0 < 0:
        raise PreconditionError(f"a0 must be >= 0, got {a0}.")
    p2 = np.asarray(p, dtype=float) ** 2
    out = np.sqrt(p2 * p2 + 16 * np.pi * a0 * p2)
    return out if out.ndim else float(out)


def sound_velocity(a0):
    return float(np.sqrt(16 * np.pi * a0))


def excitation_energy(a0, occ):
    p, counts = occ.momenta()
    return float(np.sum(counts * dispersion(a0, p)))


@dataclass(frozen=True)
class GroundStateEnergy:
    N: int
    a0: float
    leading: float
    e_lambda_term: float
    bogoliubov_term: float
    total: float
    error_estimate: float
    e_lambda: float = field(default=None)

    def to_dict(self):
        return asdict(self)


def ground_state_energy_gp(
    pot, N, M_max=60, e_lambda_method="averaged", a0=None, workers=1
):
    """
    E_N = 4 pi (N - 1) a0 + e_Lambda a0^2 + bogoliubov_lattice_sum(a0).

    Args:
        pot (RadialPotential): Unscaled potential.
        N (int): Particle number, >= 2.
        M_max (int): Cube level for e_Lambda.
        e_lambda_method (str): Any method accepted by ``e_lambda``.
        a0 (float): Scattering length, computed from pot when None.
        workers (int): Threads for the Bogoliubov sum.

    Returns:
        GroundStateEnergy
    """
    if N < 2:
        raise PreconditionError(f"N must be >= 2, got {N}.")
    if a0 is None:
        a0 = solve_zero_energy(pot).a0
    if a0 == 0:
        return GroundStateEnergy(int(N), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    elam = e_lambda(M_max, e_lambda_method)
    bog = bogoliubov_lattice_sum(a0, workers=workers)
    leading = 4 * np.pi * (N - 1) * a0
    boundary = elam.value * a0 ** 2
    return GroundStateEnergy(
        N=int(N),
        a0=float(a0),
        leading=float(leading),
        e_lambda_term=float(boundary),
        bogoliubov_term=bog.value,
        total=float(leading + boundary + bog.value),
        error_estimate=float(elam.error_estimate * a0 ** 2 + bog.error_estimate),
        e_lambda=elam.value,
    )


def _check_dilute(rho, a0):
    gas = rho * a0 ** 3
    if gas >= DILUTENESS_LIMIT:
        warnings.warn(
            f"rho a0^3 = {gas:.3g} is not dilute (>= {DILUTENESS_LIMIT}).",
            DilutenessWarning,
        )


def lhy_energy_per_particle(rho, a0):
    """4 pi rho a0 [1 + 128/(15 sqrt pi) (rho a0^3)^(1/2)]."""
    if rho <= 0 or a0 < 0:
        raise PreconditionError(f"Need rho > 0 and a0 >= 0, got {rho}, {a0}.")
    _check_dilute(rho, a0)
    return float(4 * np.pi * rho * a0 * (1 + LHY_COEFFICIENT * np.sqrt(rho * a0 ** 3)))


def depletion_closed_form(rho, a0):
    return float(DEPLETION_COEFFICIENT * np.sqrt(rho * a0 ** 3) * rho)


def _kernel(pot):
    """k -> V^(k) for a potential, or the constant kernel of a number."""
    if isinstance(pot, RadialPotential):
        return lambda k: fourier_transform(pot, k)
    value = float(pot)
    return lambda k: np.full(np.shape(k), value) if np.ndim(k) else value


def _depletion_integrand(p, c):
    root = np.sqrt(p * p + 2 * c)
    return p * c * c / (2 * (p * p + c + p * root) * root)


def depletion_integral(rho, pot):
    """
    Condensate depletion rho_+ = int d^3p/(2pi)^3 [p^2 + c - s]/(2 s), with
    c = rho V^(p) and s = sqrt(p^4 + 2 c p^2).

    Args:
        rho (float): Density, >= 0.
        pot (RadialPotential or float): Potential, or a constant kernel such
            as 8 pi a0.
    """
    if rho < 0:
        raise PreconditionError(f"rho must be >= 0, got {rho}.")
    kernel = _kernel(pot)
    c0 = rho * kernel(0.0)
    if rho == 0 or c0 == 0:
        return 0.0
    if c0 < 0:
        raise PreconditionError(f"rho V^(0) must be >= 0, got {c0}.")
    sound = np.sqrt(2 * c0)

    def integrand(p):
        c = rho * kernel(p)
        if c < 0:
            raise PreconditionError(f"rho V^(p) < 0 at |p| = {p:.6g}.")
        return _depletion_integrand(p, c)

    total = 0.0
    for a, b in ((0.0, sound), (sound, 10 * sound), (10 * sound, np.inf)):
        total += quad(integrand, a, b)[0]
    return float(total / (2 * np.pi ** 2))


def bogoliubov_energy_mf(rho, pot, N=None, M_max=16, continuum=False):
    """
    Bogoliubov's ground-state energy for a mean-field interaction.

    Lattice mode sums over p = 2 pi n, |n_i| <= M_max:
        line1 = (N/2) rho V^(0) - 1/4 sum (rho V^(p))^2 / p^2
        line2 = 1/2 sum [sqrt(p^4 + 2 p^2 rho V^(p)) - p^2 - rho V^(p)
                         + (rho V^(p))^2 / (2 p^2)]
    Continuum mode returns the same two lines per particle in the
    thermodynamic limit; the first line becomes 4 pi rho (a(0) + a(1)), or
    4 pi rho a0 for a constant kernel 8 pi a0.

    Returns:
        dict: {"line1", "line2", "total"}.
    """
    if rho <= 0:
        raise PreconditionError(f"rho must be positive, got {rho}.")
    kernel = _kernel(pot)
    constant = not isinstance(pot, RadialPotential)

    def checked(p, c):
        if np.any(c < 0):
            warnings.warn(
                "V^(p) takes negative values; the Bogoliubov energy may be complex.",
                NegativeFourierWarning,
            )
            bad = p[p * p + 2 * c < 0]
            if len(bad):
                raise NumericalError(
                    f"p^4 + 2 p^2 rho V^(p) < 0 at |p| = {bad[0]:.6g}."
                )
        return -bogoliubov_bracket(p, c)

    if continuum:
        if constant:
            line1 = 0.5 * rho * kernel(0.0)
        else:
            line1 = 4 * np.pi * rho * sum(born_series(pot, 1))
        sound = np.sqrt(2 * rho * kernel(0.0))

        def integrand(p):
            c = np.atleast_1d(rho * kernel(p))
            return float(p * p * checked(np.atleast_1d(p), c)[0])

        integral = sum(
            quad(integrand, a, b)[0]
            for a, b in ((0.0, sound), (sound, 10 * sound), (10 * sound, np.inf))
        )
        line2 = integral / (2 * np.pi ** 2) / (2 * rho)
        return {"line1": float(line1), "line2": float(line2), "total": float(line1 + line2)}

    if N is None:
        raise PreconditionError("Lattice mode needs the particle number N.")
    m, counts = cube_shells(M_max)
    p = 2 * np.pi * np.sqrt(m)
    c = rho * kernel(p)
    line1 = 0.5 * N * rho * kernel(0.0) - 0.25 * np.sum(counts * c * c / (p * p))
    line2 = 0.5 * np.sum(counts * checked(p, c))
    return {"line1": float(line1), "line2": float(line2), "total": float(line1 + line2)}


@dataclass(frozen=True)
class BogoliubovCoefficients:
    """
    Per-momentum table of the renormalized Bogoliubov coefficients.

    F = p^2 (gamma^2 + sigma^2) + conv (gamma + sigma)^2,
    G = 2 p^2 gamma sigma + conv (gamma + sigma)^2, tanh(2 tau) = -G/F.
    """

    N: int
    mu: float
    a0: float
    p: np.ndarray
    counts: np.ndarray
    gamma: np.ndarray
    sigma: np.ndarray
    conv: np.ndarray
    F: np.ndarray
    G: np.ndarray
    tau: np.ndarray

    @property
    def energies(self):
        return np.sqrt((self.F - self.G) * (self.F + self.G))

    def diagonal_constant(self):
        """1/2 sum (-F_p + sqrt(F_p^2 - G_p^2))."""
        return float(0.5 * np.sum(self.counts * (self.energies - self.F)))

    def rows(self):
        columns = (
            self.p,
            self.gamma,
            self.sigma,
            self.F,
            self.G,
            self.tau,
            self.energies,
            dispersion(self.a0, self.p),
        )
        return [list(map(float, row)) for row in zip(*columns)]

    COLUMNS = ("p", "gamma", "sigma", "F", "G", "tau", "sqrt(F^2-G^2)", "dispersion")


def _momentum_magnitudes(p_set):
    p = np.atleast_1d(np.asarray(p_set, dtype=float))
    if p.ndim == 2:
        p = np.linalg.norm(p, axis=1)
    if np.any(p <= 0):
        raise PreconditionError("Coefficient momenta must be nonzero.")
    return p


def renormalized_coefficients(pot, N, mu, p_set, counts=None, sol=None, workers=1):
    """
    Builds gamma, sigma, conv, F, G and tau on a set of momenta.

    Args:
        pot (RadialPotential): Unscaled potential.
        N (int): Particle number, with R / N < 1/2.
        mu (float): High-momentum cutoff of eta_H.
        p_set (array): Momentum magnitudes, or (n, 3) momentum vectors.
        counts (array): Multiplicity of each entry, ones by default.
        sol (NeumannSolution): Reused when given.
        workers (int): Threads for the per-momentum transforms.

    Returns:
        BogoliubovCoefficients
    """
    if mu <= 0:
        raise PreconditionError(f"mu must be positive, got {mu}.")
    p = _momentum_magnitudes(p_set)
    counts = np.ones(len(p)) if counts is None else np.asarray(counts, dtype=float)
    if sol is None:
        sol = solve_neumann(pot, N)

    def entry(q):
        eta = eta_kernel(sol, q) if q >= mu else 0.0
        return eta, vf_transform(sol, q / sol.N)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            values = list(executor.map(entry, p))
    else:
        values = [entry(q) for q in p]
    eta, conv = (np.array(v, dtype=float) for v in zip(*values))

    gamma, sigma = np.cosh(eta), np.sinh(eta)
    p2 = p * p
    pair = conv * (gamma + sigma) ** 2
    F = p2 * (gamma ** 2 + sigma ** 2) + pair
    G = 2 * p2 * gamma * sigma + pair
    bad = np.nonzero(np.abs(G) >= F)[0]
    if len(bad):
        raise PreconditionError(
            f"|G_p| >= F_p at |p| = {p[bad[0]]:.6g} (N={N}, mu={mu}); "
            "increase mu or N."
        )
    ratio = np.clip(-G / F, -1 + TAU_CLAMP, 1 - TAU_CLAMP)
    tau = 0.5 * np.arctanh(ratio)
    logger.debug(
        "coefficients N=%d mu=%g: %d momenta, max |tau|=%.3e", N, mu, len(p), np.abs(tau).max()
    )
    return BogoliubovCoefficients(
        N=int(N),
        mu=float(mu),
        a0=solve_zero_energy(pot).a0,
        p=p,
        counts=counts,
        gamma=gamma,
        sigma=sigma,
        conv=conv,
        F=F,
        G=G,
        tau=tau,
    )


def coefficient_shells(pot, N, mu, M, sol=None, workers=1):
    """renormalized_coefficients on the shells of the momentum cube of level M."""
    m, counts = cube_shells(M)
    return renormalized_coefficients(
        pot, N, mu, 2 * np.pi * np.sqrt(m), counts=counts, sol=sol, workers=workers
    )


def bogoliubov_approximation_tau(pot, N, p_set, kappa=1.0):
    """Plain Bogoliubov angles, tanh(2 tau) = -V^(p/N) / (p^2 + V^(p/N))."""
    p = _momentum_magnitudes(p_set)
    vhat = kappa * fourier_transform(pot, p / N)
    return 0.5 * np.arctanh(-vhat / (p * p + vhat))


def diagonalization_constant(coeffs):
    """
    1/2 sum (-F_p + omega_p) with omega_p the positive eigenvalue of the pair
    matrix diag(1, -1) [[F, G], [G, F]].
    """
    total = 0.0
    for F, G, count in zip(coeffs.F, coeffs.G, coeffs.counts):
        dynamical = np.array([[F, G], [-G, -F]])
        omega = np.max(np.linalg.eigvals(dynamical).real)
        total += count * (omega - F)
    return float(0.5 * total)
