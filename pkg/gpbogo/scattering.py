"""
Zero-energy scattering and the Neumann problem on the ball of radius 1/2.

Both problems are solved on the radial reduction u(r) = r f(r):

    zero energy:  u'' = V(r) u / 2,                      u(0) = 0
    Neumann:      u'' = (N^2 V(N r) / 2 - lambda) u,     u(0) = 0,
                  u(1/2) = 1/2, u'(1/2) = 1

with an adaptive Runge-Kutta integrator inside the support of the potential
and the free solution outside of it.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from gpbogo.lattice import cube_shells
from gpbogo.potential import fourier_transform
from gpbogo.utils.errors import (
    BracketError,
    IntegrationError,
    NumericalError,
    PreconditionError,
)
from gpbogo.utils.logging_config import get_logger
from gpbogo.utils.quadrature import piecewise_radial_transform, quad

logger = get_logger(__name__)

R_START = 1e-8
ODE_RTOL = 1e-11
ODE_ATOL = 1e-13
RESIDUAL_POINTS = 64

BALL_RADIUS = 0.5
LAMBDA_MAX = (2 * np.pi) ** 2
LAMBDA_XTOL = 1e-12

# eta_p = ETA_SIGN * N**ETA_N_POWER * w^(p / N), w = 1 - f_N in rescaled variables.
ETA_N_POWER = -2  # ||eta_H||_2 decays like mu^(-1/2) at this power
ETA_SIGN = -1.0  # negative sign convention: eta_p = -N^-2 w^(p / N)

BORN_CHUNKS_MIN = 100
BORN_CHUNKS_MAX = 20000
BORN_RTOL = 1e-12


def _integrate_radial(rhs, r0, r1, y0, dense_output=False):
    sol = integrate.solve_ivp(
        rhs,
        (r0, r1),
        y0,
        method="DOP853",
        rtol=ODE_RTOL,
        atol=ODE_ATOL,
        dense_output=dense_output,
    )
    if sol.status != 0:
        raise IntegrationError(f"Radial integration failed: {sol.message}", sol.t[-1])
    return sol


def _segment_points(breaks, n):
    grid = np.linspace(breaks[0], breaks[-1], n)
    return np.unique(np.concatenate([grid, breaks]))


def _ode_residual(potential_fn, u_fn, du_fn, breaks):
    """
    Integrated-form defect of u'' = W u on the grid.

    Returns max_i |u'(r_i) - u'(r_0) - int_{r_0}^{r_i} W u| / max_i |u'(r_i)|.
    """
    points = _segment_points(breaks, RESIDUAL_POINTS)
    du = du_fn(points)
    increments = [
        quad(lambda r: potential_fn(r) * u_fn(r), a, b)[0]
        for a, b in zip(points[:-1], points[1:])
    ]
    cumulative = np.concatenate([[0.0], np.cumsum(increments)])
    defect = np.abs(du - du[0] - cumulative)
    return float(defect.max() / max(np.abs(du).max(), 1e-300))


@dataclass(frozen=True)
class ScatteringSolution:
    """
    Solution of the zero-energy scattering equation.

    The profile is normalized so that u(r) = r - a0 and f(r) = 1 - a0 / r
    for r >= R.

    Args:
        potential (RadialPotential): The potential V.
        a0 (float): Scattering length.
        residual (float): Relative integrated-form ODE defect.
        inner (OdeSolution): Dense solution (u, u') on [R_START, R], scaled
            by ``slope``.
        slope (float): u'(R) of the unnormalized solution.
    """

    potential: object
    a0: float
    residual: float
    inner: object = field(default=None, repr=False, compare=False)
    slope: float = 1.0

    @property
    def R(self):
        return self.potential.R

    def _state(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        u = r - self.a0
        du = np.ones_like(r)
        inside = r < self.R
        if self.inner is not None and np.any(inside):
            rr = np.clip(r[inside], R_START, None)
            y = self.inner(rr) / self.slope
            u[inside], du[inside] = y[0], y[1]
            tiny = r[inside] < R_START
            if np.any(tiny):
                u_in = u[inside]
                u_in[tiny] *= r[inside][tiny] / R_START
                u[inside] = u_in
        return u, du

    def u(self, r):
        out = self._state(r)[0]
        return out if np.ndim(r) else float(out[0])

    def du(self, r):
        out = self._state(r)[1]
        return out if np.ndim(r) else float(out[0])

    def f(self, r):
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        rr = np.maximum(r_arr, R_START)
        out = self._state(rr)[0] / rr
        return out if np.ndim(r) else float(out[0])

    def integral_identity(self):
        """(8 pi)^-1 int V f d^3x, which equals a0."""
        if self.potential.is_zero:
            return 0.0
        breaks = self.potential.breakpoints
        total = 0.0
        for a, b in zip(breaks[:-1], breaks[1:]):
            total += quad(lambda r: r * self.potential(r) * self.u(r), a, b)[0]
        return 0.5 * total

    def profile(self, r_out=None, n=201):
        """(r, f(r)) on [0, r_out] with r_out defaulting to 4R."""
        r_out = 4 * self.R if r_out is None else r_out
        r = np.linspace(0.0, r_out, n)
        return r, self.f(r)


def solve_zero_energy(pot):
    """
    Solves (-Laplace + V/2) f = 0 with f -> 1 at infinity.

    Args:
        pot (RadialPotential): Nonnegative potential of support R.

    Returns:
        ScatteringSolution
    """
    if pot.is_zero:
        return ScatteringSolution(potential=pot, a0=0.0, residual=0.0)

    def rhs(r, y):
        return [y[1], 0.5 * pot(r) * y[0]]

    sol = _integrate_radial(rhs, R_START, pot.R, [R_START, 1.0], dense_output=True)
    u_R, du_R = sol.y[0, -1], sol.y[1, -1]
    a0 = pot.R - u_R / du_R
    if a0 < -1e-12:
        raise NumericalError(f"Negative scattering length {a0:.3e} for V >= 0.")
    a0 = max(a0, 0.0)
    breaks = np.concatenate([[R_START], pot.breakpoints[1:]])
    residual = _ode_residual(
        lambda r: 0.5 * pot(r),
        lambda r: sol.sol(r)[0],
        lambda r: sol.sol(r)[1],
        breaks,
    )
    logger.debug("zero-energy solve: a0=%.12g residual=%.2e", a0, residual)
    return ScatteringSolution(
        potential=pot, a0=float(a0), residual=residual, inner=sol.sol, slope=du_R
    )


def _square_integral_of_transform(pot):
    """int_0^inf V^(p)^2 dp, chunk by chunk with a p^-4 tail estimate."""
    width = np.pi / pot.R
    total, chunk, k = 0.0, 0.0, 0
    while k < BORN_CHUNKS_MAX:
        a, b = k * width, (k + 1) * width
        chunk = quad(lambda p: fourier_transform(pot, p) ** 2, a, b)[0]
        total += chunk
        k += 1
        if k >= BORN_CHUNKS_MIN and abs(chunk) <= BORN_RTOL * abs(total):
            break
    else:
        logger.warning("Born integral stopped after %d chunks", k)
    edge = k * width
    tail = (chunk / width) * edge / 3.0
    return total + tail


def born_series(pot, order=1):
    """
    First and second Born approximations of the scattering length.

    a^(0) = V^(0) / (8 pi) and
    a^(1) = -(8 pi)^-1 int d^3p / (2 pi)^3 V^(p)^2 / (2 p^2)
          = -(32 pi^3)^-1 int_0^inf V^(p)^2 dp.

    Args:
        pot (RadialPotential): Potential.
        order (int): 0 or 1.

    Returns:
        list: [a^(0)] or [a^(0), a^(1)].
    """
    if order not in (0, 1):
        raise PreconditionError(f"Born order must be 0 or 1, got {order}.")
    terms = [fourier_transform(pot, 0.0) / (8 * np.pi)]
    if order == 1:
        if pot.is_zero:
            terms.append(0.0)
        else:
            terms.append(-_square_integral_of_transform(pot) / (32 * np.pi ** 3))
    return [float(t) for t in terms]


@dataclass(frozen=True)
class NeumannSolution:
    """
    Lowest Neumann eigenfunction f_N of -Laplace + N^2 V(N x) / 2 on |x| <= 1/2.

    Args:
        potential (RadialPotential): Unscaled potential V.
        N (int): Particle number.
        lambdaN (float): Lowest eigenvalue.
        inner (OdeSolution): Dense (u, u') on [R_START, R/N], unnormalized.
        norm (float): Factor making f_N(1/2) = 1.
        edge (tuple): (u, u') of the unnormalized solution at r = R/N.
        mu (float): High-momentum cutoff used for eta_H.
    """

    potential: object
    N: int
    lambdaN: float
    inner: object = field(default=None, repr=False, compare=False)
    norm: float = 1.0
    edge: tuple = (BALL_RADIUS, 1.0)
    mu: float = 0.0

    @property
    def support(self):
        return self.potential.R / self.N

    def _outer(self, r):
        b = self.support if self.inner is not None else 0.0
        u_b, du_b = self.edge if self.inner is not None else (0.0, 1.0)
        return _free_propagate(u_b, du_b, self.lambdaN, r - b)

    def u(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        if self.inner is None:
            out[:] = r
            return out
        inside = r < self.support
        if np.any(inside):
            rr = np.clip(r[inside], R_START, None)
            out[inside] = self.inner(rr)[0] * np.minimum(r[inside] / rr, 1.0)
        if not np.all(inside):
            out[~inside] = self._outer(r[~inside])[0]
        return self.norm * out

    def du(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if self.inner is None:
            return np.ones_like(r)
        out = np.empty_like(r)
        inside = r < self.support
        if np.any(inside):
            out[inside] = self.inner(np.clip(r[inside], R_START, None))[1]
        if not np.all(inside):
            out[~inside] = self._outer(r[~inside])[1]
        return self.norm * out

    def f(self, r):
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        rr = np.maximum(r_arr, R_START)
        out = self.u(rr) / rr
        return out if np.ndim(r) else float(out[0])

    def boundary_residual(self):
        """(f_N(1/2) - 1, d/dr f_N(1/2))."""
        r = BALL_RADIUS
        u, du = self.u(r)[0], self.du(r)[0]
        return u / r - 1.0, du / r - u / r ** 2

    def profile(self, n=201):
        r = np.linspace(0.0, BALL_RADIUS, n)
        return r, self.f(r)

    def with_cutoff(self, mu):
        return NeumannSolution(
            self.potential, self.N, self.lambdaN, self.inner, self.norm, self.edge, mu
        )


def _free_propagate(u_b, du_b, lam, x):
    """(u, u') after a distance x of u'' = -lam u."""
    x = np.asarray(x, dtype=float)
    k = np.sqrt(lam)
    c, s = np.cos(k * x), np.sin(k * x)
    sin_over_k = x * np.sinc(k * x / np.pi)
    return u_b * c + du_b * sin_over_k, -u_b * lam * sin_over_k + du_b * c


def _neumann_inner(pot, N, lam, dense_output=False):
    n2 = float(N) ** 2

    def rhs(r, y):
        return [y[1], (0.5 * n2 * pot(N * r) - lam) * y[0]]

    return _integrate_radial(rhs, R_START, pot.R / N, [R_START, 1.0], dense_output)


def _mismatch(pot, N, lam):
    sol = _neumann_inner(pot, N, lam)
    u_b, du_b = sol.y[0, -1], sol.y[1, -1]
    u, du = _free_propagate(u_b, du_b, lam, BALL_RADIUS - pot.R / N)
    return float((du - 2.0 * u) / max(abs(u), abs(du)))


def solve_neumann(pot, N, lambda_max=LAMBDA_MAX):
    """
    Lowest Neumann eigenpair on the ball |x| <= 1/2.

    The eigenvalue is found by bisection of the shooting mismatch
    u'(1/2) - 2 u(1/2), which is positive at lambda = 0 for V >= 0.

    Args:
        pot (RadialPotential): Unscaled potential V.
        N (int): Particle number; requires R / N < 1/2.
        lambda_max (float): Upper end of the eigenvalue bracket.

    Returns:
        NeumannSolution
    """
    if N < 1:
        raise PreconditionError(f"N must be >= 1, got {N}.")
    if pot.R / N >= BALL_RADIUS:
        raise PreconditionError(
            f"Support radius R/N = {pot.R / N:.4g} must be smaller than 1/2."
        )
    if pot.is_zero:
        return NeumannSolution(potential=pot, N=int(N), lambdaN=0.0)

    lo, hi = 0.0, float(lambda_max)
    g_lo, g_hi = _mismatch(pot, N, lo), _mismatch(pot, N, hi)
    if not (g_lo > 0 > g_hi):
        raise BracketError(
            f"No eigenvalue bracket in (0, {hi:.4g}): mismatch {g_lo:.3e}, {g_hi:.3e}."
        )
    lam = optimize.bisect(
        lambda x: _mismatch(pot, N, x), lo, hi, xtol=LAMBDA_XTOL, maxiter=200
    )
    sol = _neumann_inner(pot, N, lam, dense_output=True)
    edge = (float(sol.y[0, -1]), float(sol.y[1, -1]))
    u_half = _free_propagate(*edge, lam, BALL_RADIUS - pot.R / N)[0]
    logger.debug("Neumann solve: N=%d lambda=%.12g", N, lam)
    return NeumannSolution(
        potential=pot,
        N=int(N),
        lambdaN=float(lam),
        inner=sol.sol,
        norm=float(BALL_RADIUS / u_half),
        edge=edge,
    )


def intvf(sol):
    """int N^3 V(N x) f_N(x) dx = 4 pi int y^2 V(y) f_N(y / N) dy."""
    return vf_transform(sol, 0.0)


def vf_transform(sol, k):
    """
    Fourier transform of y -> V(y) f_N(y / N) at wavenumber k.

    Equals N^3 (V(N.) f_N)^(N k), the convolution term of the renormalized
    coefficients at k = p / N.
    """
    pot = sol.potential
    if pot.is_zero:
        return 0.0
    return piecewise_radial_transform(
        lambda y: pot(y) * sol.f(y / sol.N), pot.breakpoints, k
    )


def rescaled_w_transform(sol, k):
    """
    Transform of y -> 1 - f_N(y / N) (support |y| <= N/2) at wavenumber k.
    """
    if sol.inner is None:
        return 0.0
    N = sol.N
    breaks = np.array([0.0, sol.support, BALL_RADIUS])
    value = piecewise_radial_transform(lambda r: 1.0 - sol.f(r), breaks, N * k)
    return float(N) ** 3 * value


def _magnitude(p):
    p = np.asarray(p, dtype=float)
    return float(np.linalg.norm(p)) if p.ndim else abs(float(p))


def eta_kernel(sol, p):
    """
    Correlation kernel eta_p = -N^-2 w^(p / N), a function of |p| only.

    Args:
        sol (NeumannSolution): Neumann solution at particle number N.
        p (float or array): Momentum vector in 2 pi Z^3 or its magnitude.
    """
    q = _magnitude(p)
    return ETA_SIGN * float(sol.N) ** ETA_N_POWER * rescaled_w_transform(sol, q / sol.N)


def eta_shells(sol, M):
    """
    Kernel values on the nonzero shells of the momentum cube of level M.

    Returns:
        tuple: (m, |p|, eta, count) arrays indexed by shell m = |n|^2.
    """
    m, counts = cube_shells(M)
    p = 2 * np.pi * np.sqrt(m)
    eta = np.array([eta_kernel(sol, pp) for pp in p])
    return m, p, eta, counts


def eta_highpass(sol, mu, M):
    """
    eta_H(p) = eta_p 1(|p| >= mu) on the momentum cube 2 pi {-M..M}^3 minus 0.

    Returns:
        dict: Integer vector n -> eta_H(2 pi n).
    """
    if mu <= 0:
        raise PreconditionError(f"Cutoff mu must be positive, got {mu}.")
    m, p, eta, _ = eta_shells(sol, M)
    by_shell = dict(zip(m.tolist(), np.where(p >= mu, eta, 0.0).tolist()))
    grid = np.arange(-M, M + 1)
    n = np.stack(np.meshgrid(grid, grid, grid, indexing="ij"), -1).reshape(-1, 3)
    n = n[np.any(n != 0, axis=1)]
    norms = (n ** 2).sum(1)
    return {tuple(v): by_shell[int(s)] for v, s in zip(n.tolist(), norms)}


def eta_norm(sol, mu, M):
    """||eta_H||_2 over the momentum cube of level M."""
    m, p, eta, counts = eta_shells(sol, M)
    mask = p >= mu
    return float(np.sqrt(np.sum(counts[mask] * eta[mask] ** 2)))


def eta_table(sol, M):
    """Rows (|p|, count, eta_p) per shell of the cube of level M."""
    _, p, eta, counts = eta_shells(sol, M)
    return ["p", "count", "eta"], [(pp, int(c), e) for pp, c, e in zip(p, counts, eta)]
