"""
Momentum lattices and the lattice sums of the ground-state energy expansion.

Two lattices are kept apart: the integer lattice Z^3 (used by e_Lambda) and the
momentum lattice 2 pi Z^3 of the unit box (used by every energy sum). Radial
summands are evaluated once per shell m = |n|^2 and weighted with the number of
lattice points on that shell.
"""
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy import signal, special

from gpbogo.potential import fourier_transform
from gpbogo.utils.errors import (
    ConvergenceWarning,
    PreconditionError,
    SeriesDivergenceWarning,
)
from gpbogo.utils.logging_config import get_logger
from gpbogo.utils.quadrature import quad

logger = get_logger(__name__)

LHY_COEFFICIENT = 128.0 / (15.0 * np.sqrt(np.pi))

CESARO_WINDOW = 16
CESARO_PASSES = 3
NOTCH_PASSES = 2
SPREAD_POINTS = 5
ABEL_EPSILONS = (0.2, 0.1, 0.05, 0.025)
ABEL_DECAY = 40.0
EWALD_CUTOFF = 6

BOGSUM_TOL = 1e-8
BOGSUM_START = 4096
BOGSUM_MAX = 1 << 22
SUM_VS_INTEGRAL_RANGE = 10.0


@dataclass(frozen=True)
class MomentumLattice:
    """
    Enumeration of spacing * Z^3.

    Args:
        spacing (float): Lattice spacing, 2 pi for the unit box, 1 for Z^3.
        order (str): "cube" (|n_i| <= level) or "shell" (|n|^2 <= level).
        exclude_zero (bool): Drop the origin.
    """

    spacing: float = 2 * np.pi
    order: str = "cube"
    exclude_zero: bool = True

    def points(self, level):
        if self.order == "cube":
            n = cube_points(level)
        elif self.order == "shell":
            M = int(np.floor(np.sqrt(level)))
            n = cube_points(M)
            n = n[(n ** 2).sum(1) <= level]
        else:
            raise PreconditionError(f"Unknown enumeration order {self.order!r}.")
        if self.exclude_zero:
            n = n[np.any(n != 0, axis=1)]
        return n

    def momenta(self, level):
        return self.spacing * self.points(level)


@dataclass(frozen=True)
class LatticeSumResult:
    value: float
    truncation: int
    error_estimate: float
    method: str
    details: dict = field(default_factory=dict, compare=False)

    def to_dict(self):
        return asdict(self)


def cube_points(M):
    """All integer points of {-M..M}^3, ordered lexicographically."""
    grid = np.arange(-M, M + 1)
    return np.stack(np.meshgrid(grid, grid, grid, indexing="ij"), -1).reshape(-1, 3)


def _square_indicator(j_max, length):
    r1 = np.zeros(length)
    j = np.arange(0, j_max + 1)
    j = j[j * j < length]
    r1[j * j] = 2.0
    r1[0] = 1.0
    return r1


def _cube3(r1, length):
    r2 = signal.fftconvolve(r1, r1)[:length]
    r3 = signal.fftconvolve(r2, r1)[:length]
    return np.rint(r3).astype(np.int64)


@lru_cache(maxsize=8)
def shell_multiplicities(m_max):
    """
    r3(m) = #{n in Z^3 : |n|^2 = m} for m = 0..m_max.
    """
    length = int(m_max) + 1
    r3 = _cube3(_square_indicator(int(np.sqrt(m_max)) + 1, length), length)
    r3.setflags(write=False)
    return r3


def cube_shells(M):
    """
    Shells of the cube {-M..M}^3 without the origin.

    Returns:
        tuple: (m, counts) with m = |n|^2 > 0 and the number of cube points on it.
    """
    length = 3 * M * M + 1
    counts = _cube3(_square_indicator(M, M * M + 1), length)
    m = np.nonzero(counts)[0]
    m = m[m > 0]
    return m, counts[m]


def _parallel_shell_sum(func, m, weights, workers=1):
    """sum_i weights[i] func(m[i]), chunked over workers, combined in order."""
    if workers <= 1 or len(m) < 2 * workers:
        return float(np.sum(weights * func(m)))
    chunks = np.array_split(np.arange(len(m)), workers)

    def partial(idx):
        return float(np.sum(weights[idx] * func(m[idx])))

    with ThreadPoolExecutor(max_workers=workers) as executor:
        partials = list(executor.map(partial, chunks))
    return float(sum(partials))


def _volume_matched_radius(count):
    """Radius of the ball in n-space holding count lattice points."""
    return (3.0 * count / (4.0 * np.pi)) ** (1.0 / 3.0)


# ---------------------------------------------------------------------------
# e_Lambda
# ---------------------------------------------------------------------------


def cube_partial_sums(M):
    """
    S(L) = sum over n in {-L..L}^3 minus 0 of cos(|n|)/|n|^2, for L = 0..M.

    Evaluated on the closed octant with weights 2^(number of nonzero entries),
    binned by max-norm.
    """
    grid = np.arange(0, M + 1)
    n = np.stack(np.meshgrid(grid, grid, grid, indexing="ij"), -1).reshape(-1, 3)
    n = n[1:]
    norm2 = (n ** 2).sum(1).astype(float)
    weight = 2.0 ** np.count_nonzero(n, axis=1)
    level = n.max(1)
    increments = np.bincount(
        level, weights=weight * np.cos(np.sqrt(norm2)) / norm2, minlength=M + 1
    )
    return np.cumsum(increments)


def _moving_average(values, window):
    return np.convolve(values, np.ones(window) / window, mode="valid")


def _notch(values):
    """Removes a c * exp(+-i L) component of a sequence indexed by L."""
    c = np.cos(1.0)
    return (values[2:] - 2 * c * values[1:-1] + values[:-2]) / (2 - 2 * c)


def smooth_partial_sums(sums, window=CESARO_WINDOW, passes=CESARO_PASSES):
    """
    Accelerates oscillating cube partial sums.

    The face terms of the cube oscillate like cos(L)/L and are removed with a
    notch at unit frequency; the remaining edge and corner oscillations are
    damped with repeated moving averages of the last ``window`` partials.
    """
    values = np.asarray(sums, dtype=float)
    for _ in range(NOTCH_PASSES):
        if len(values) < SPREAD_POINTS + 2:
            break
        values = _notch(values)
    room = len(values) - SPREAD_POINTS
    if passes > 0 and room > 0:
        window = max(1, min(window, room // passes + 1))
        for _ in range(passes):
            values = _moving_average(values, window)
    return values


def abel_estimate(epsilons=ABEL_EPSILONS, decay=ABEL_DECAY):
    """
    Limit of sum' cos(|n|)/|n|^2 from damped sums.

    For each eps the spherical sum of cos(|n|) exp(-eps |n|)/|n|^2 minus the
    continuum integral 4 pi eps/(1 + eps^2) is computed; a polynomial in eps is
    then extrapolated to eps = 0.

    Returns:
        tuple: (limit, error estimate).
    """
    epsilons = np.asarray(sorted(epsilons, reverse=True), dtype=float)
    m_max = int(np.ceil((decay / epsilons.min()) ** 2))
    r3 = shell_multiplicities(m_max)
    m = np.arange(1, m_max + 1, dtype=float)
    root = np.sqrt(m)
    base = r3[1:] * np.cos(root) / m
    values = np.array(
        [
            np.sum(base * np.exp(-eps * root)) - 4 * np.pi * eps / (1 + eps ** 2)
            for eps in epsilons
        ]
    )
    full = np.polyfit(epsilons, values, len(epsilons) - 1)[-1]
    reduced = np.polyfit(epsilons[1:], values[1:], len(epsilons) - 2)[-1]
    return float(full), float(abs(full - reduced))


@lru_cache(maxsize=4)
def lattice_zeta_constant(cutoff=EWALD_CUTOFF):
    """
    I = lim (sum'_{Z^3} 1/|n|^2 - int d^3x/|x|^2), about -8.91363.

    Ewald split of the Epstein zeta function at s = 1:
    I = sum' exp(-pi n^2)/n^2 + pi sum' erfc(sqrt(pi)|n|)/|n| - 3 pi.
    """
    n = cube_points(cutoff)
    n = n[np.any(n != 0, axis=1)]
    norm2 = (n ** 2).sum(1).astype(float)
    norm = np.sqrt(norm2)
    real = np.sum(np.exp(-np.pi * norm2) / norm2)
    recip = np.pi * np.sum(special.erfc(np.sqrt(np.pi) * norm) / norm)
    return float(real + recip - 3 * np.pi)


def regulated_lattice_sum(alpha):
    """
    F(alpha) = sum'_{Z^3} exp(-alpha n^2)/n^2 - 2 pi^(3/2)/sqrt(alpha).

    F(alpha) = I + alpha up to terms of order exp(-pi^2/alpha).
    """
    if alpha <= 0:
        raise PreconditionError(f"alpha must be positive, got {alpha}.")
    L = int(np.ceil(np.sqrt(40.0 / alpha)))
    m, counts = cube_shells(L)
    total = np.sum(counts * np.exp(-alpha * m) / m)
    return float(total - 2 * np.pi ** 1.5 / np.sqrt(alpha))


def e_lambda(M_max, method="averaged", window=CESARO_WINDOW, passes=CESARO_PASSES):
    """
    e_Lambda = 2 - lim_{M} sum over {-M..M}^3 minus 0 of cos(|n|)/|n|^2.

    Args:
        M_max (int): Cube level.
        method (str): "raw" (last partial sum), "averaged" (accelerated
            partial sums), "abel" (damped spherical sums) or "ewald"
            (3/2 - I with I the regularized sum of 1/|n|^2).
        window (int): Moving-average window of the averaged method.
        passes (int): Number of moving-average passes.

    Returns:
        LatticeSumResult
    """
    if method == "raw":
        if M_max < 1:
            raise PreconditionError(f"M_max must be >= 1, got {M_max}.")
        sums = cube_partial_sums(M_max)
        last = sums[-1]
        step = abs(sums[-1] - sums[-2])
        if step > 1e-3:
            warnings.warn(
                f"Raw cube partial sums are not Cauchy (last step {step:.3e}); "
                "the sum converges only conditionally.",
                ConvergenceWarning,
            )
        return LatticeSumResult(
            2.0 - last, M_max, step, "raw", {"partial_sum": float(last)}
        )
    if method == "averaged":
        if M_max < 2:
            raise PreconditionError(f"M_max must be >= 2, got {M_max}.")
        smooth = smooth_partial_sums(cube_partial_sums(M_max)[1:], window, passes)
        tail = smooth[-SPREAD_POINTS:]
        error = float(np.ptp(tail))
        if len(smooth) > 1:
            error = max(error, abs(smooth[-1] - smooth[-2]))
        return LatticeSumResult(
            2.0 - float(smooth[-1]),
            M_max,
            error,
            "averaged",
            {"partial_sum": float(smooth[-1])},
        )
    if method == "abel":
        limit, error = abel_estimate()
        return LatticeSumResult(2.0 - limit, 0, error, "abel", {"partial_sum": limit})
    if method == "ewald":
        constant = lattice_zeta_constant()
        return LatticeSumResult(
            1.5 - constant, EWALD_CUTOFF, 1e-12, "ewald", {"zeta_constant": constant}
        )
    raise PreconditionError(f"Unknown e_Lambda method {method!r}.")


# ---------------------------------------------------------------------------
# Bogoliubov sums
# ---------------------------------------------------------------------------


def bogoliubov_bracket(p, c):
    """
    h(p) = p^2 + c - sqrt(p^4 + 2 c p^2) - c^2/(2 p^2), cancellation free.
    """
    p2 = np.asarray(p, dtype=float) ** 2
    root = np.sqrt(p2 * p2 + 2 * c * p2)
    return -(c ** 3) * (1 + 2 * p2 / (p2 + root)) / (2 * p2 * (p2 + c + root))


def bogoliubov_summand(p, a0):
    """Half the bracket of the energy sum; behaves like -(8 pi a0)^3/(4 p^4)."""
    return 0.5 * bogoliubov_bracket(p, 8 * np.pi * a0)


def _bogsum_at(a0, m_max, workers):
    c = 8 * np.pi * a0
    r3 = shell_multiplicities(m_max)
    m = np.nonzero(r3)[0]
    m = m[m > 0]
    weights = r3[m].astype(float)

    def summand(mm):
        return bogoliubov_summand(2 * np.pi * np.sqrt(mm), a0)

    head = -_parallel_shell_sum(summand, m, weights, workers)
    count = float(np.sum(weights)) + 1.0
    P = 2 * np.pi * _volume_matched_radius(count)
    tail = (c ** 3 / (4 * P) - 5 * c ** 4 / (48 * P ** 3)) / (2 * np.pi ** 2)
    p6_term = 5 * c ** 4 / (48 * P ** 3) / (2 * np.pi ** 2)
    boundary = c ** 3 * float(m_max) ** (-1.25) / (4 * (2 * np.pi) ** 4)
    return head + tail, 0.5 * p6_term + boundary


def bogoliubov_lattice_sum(a0, m_max=None, tol=BOGSUM_TOL, workers=1):
    """
    -1/2 sum_{p in 2 pi Z^3 minus 0} [p^2 + 8 pi a0 - sqrt(p^4 + 16 pi a0 p^2)
    - (8 pi a0)^2/(2 p^2)], summed over shells |p|^2 <= (2 pi)^2 m_max with an
    integral tail correction.

    Args:
        a0 (float): Scattering length, >= 0.
        m_max (int): Fixed shell truncation; chosen adaptively when None.
        tol (float): Target error estimate for the adaptive truncation.
        workers (int): Threads used for the shell sum.

    Returns:
        LatticeSumResult
    """
    if a0 < 0:
        raise PreconditionError(f"a0 must be >= 0, got {a0}.")
    if a0 == 0:
        return LatticeSumResult(0.0, 0, 0.0, "shells")
    if m_max is not None:
        value, error = _bogsum_at(a0, int(m_max), workers)
        return LatticeSumResult(value, int(m_max), error, "shells")
    m_max = BOGSUM_START
    value, error = _bogsum_at(a0, m_max, workers)
    while error > tol and m_max < BOGSUM_MAX:
        m_max *= 4
        value, error = _bogsum_at(a0, m_max, workers)
    if error > tol:
        warnings.warn(
            f"Bogoliubov lattice sum error {error:.2e} above {tol:.1e}.",
            ConvergenceWarning,
        )
    logger.debug("bogoliubov sum a0=%g: %.12g +- %.1e (m_max=%d)", a0, value, error, m_max)
    return LatticeSumResult(value, m_max, error, "shells")


def sum_vs_integral_check(a0, R_scale, workers=1):
    """
    Compares -(R/2) sum_{p in (2 pi/sqrt R) Z^3 minus 0} h(p) with its continuum
    limit 4 pi a0 (128/(15 sqrt pi)) a0^(3/2) R^(5/2), where
    h(p) = p^2 + c - sqrt(p^4 + 2 c p^2) - c^2/(2 p^2) and c = 8 pi a0.

    Returns:
        dict: {"sum", "integral", "ratio", "truncation"}.
    """
    if R_scale < 1:
        raise PreconditionError(f"R_scale must be >= 1, got {R_scale}.")
    if a0 == 0:
        return {"sum": 0.0, "integral": 0.0, "ratio": 1.0, "truncation": 0}
    c = 8 * np.pi * a0
    spacing = 2 * np.pi / np.sqrt(R_scale)
    m_max = int(np.ceil((SUM_VS_INTEGRAL_RANGE * np.sqrt(c) / spacing) ** 2))
    r3 = shell_multiplicities(m_max)
    m = np.nonzero(r3)[0]
    m = m[m > 0]
    weights = r3[m].astype(float)
    head = _parallel_shell_sum(
        lambda mm: bogoliubov_bracket(spacing * np.sqrt(mm), c), m, weights, workers
    )
    P = spacing * _volume_matched_radius(float(np.sum(weights)) + 1.0)
    density = R_scale ** 1.5 / (2 * np.pi) ** 3
    tail = density * 4 * np.pi * (-(c ** 3) / (2 * P) + 5 * c ** 4 / (24 * P ** 3))
    total = -0.5 * R_scale * (head + tail)
    integral = 4 * np.pi * a0 * LHY_COEFFICIENT * a0 ** 1.5 * R_scale ** 2.5
    return {
        "sum": float(total),
        "integral": float(integral),
        "ratio": float(total / integral),
        "truncation": m_max,
    }


# ---------------------------------------------------------------------------
# Finite-volume scattering length
# ---------------------------------------------------------------------------


def _radial_grid_values(pot, N, span):
    """V^(2 pi |n| / N) on {-span..span}^3, one transform per shell."""
    n = cube_points(span)
    norm2 = (n ** 2).sum(1)
    shells, inverse = np.unique(norm2, return_inverse=True)
    values = fourier_transform(pot, 2 * np.pi * np.sqrt(shells) / N)
    side = 2 * span + 1
    return values[inverse].reshape(side, side, side), norm2.reshape(side, side, side)


def finite_volume_series(pot, N, k_max, M_max):
    """
    Terms of the finite-volume Born series of 8 pi a_Lambda.

    Term k is (-1)^k/(2N)^k sum over p_1..p_k in the cube of level M_max of
    V^(p_1/N)/p_1^2 prod_i V^((p_i - p_{i+1})/N)/p_{i+1}^2 V^(p_k/N), obtained
    by repeated application of the kernel V^((p - q)/N) with an FFT
    convolution.

    Returns:
        list: [V^(0), term_1, ..., term_k_max].
    """
    if k_max < 1 or M_max < 1:
        raise PreconditionError("Need k_max >= 1 and M_max >= 1.")
    kernel, _ = _radial_grid_values(pot, N, 2 * M_max)
    centre = slice(M_max, 3 * M_max + 1)
    vhat = kernel[centre, centre, centre]
    grid = np.arange(-M_max, M_max + 1)
    n = np.stack(np.meshgrid(grid, grid, grid, indexing="ij"), 0)
    p2 = (2 * np.pi) ** 2 * (n ** 2).sum(0).astype(float)
    inv_p2 = np.zeros_like(p2)
    inv_p2[p2 > 0] = 1.0 / p2[p2 > 0]

    terms = [float(fourier_transform(pot, 0.0))]
    u = vhat * inv_p2
    for k in range(1, k_max + 1):
        if k > 1:
            u = signal.fftconvolve(kernel, u, mode="valid") * inv_p2
        term = (-1.0 / (2 * N)) ** k * float(np.sum(u * vhat))
        terms.append(term)
        if k > 1 and abs(term) >= abs(terms[-2]):
            warnings.warn(
                f"Born series term {k} ({term:.3e}) does not decrease; the "
                "potential is too strong for the series.",
                SeriesDivergenceWarning,
            )
    return terms


def finite_volume_scattering_length(pot, N, k_max=1, M_max=8):
    """a_Lambda from the truncated finite-volume Born series."""
    return float(sum(finite_volume_series(pot, N, k_max, M_max)) / (8 * np.pi))


def finite_volume_shift(pot, N, alpha=0.05):
    """
    Leading-order 4 pi (N - 1)(a_Lambda - a0) for the resummed series.

    Uses t(p) = (V f)^(p / N) from the zero-energy solution:
    4 pi (N - 1)(a_Lambda - a0) = -((N - 1)/(4N)) [sum' - int](t^2/p^2), with
    the sum-minus-integral split into a Gaussian-regulated lattice constant
    and the p^2 moment of t^2.
    """
    from gpbogo.scattering import solve_zero_energy

    sol = solve_zero_energy(pot)
    if sol.a0 == 0:
        return 0.0
    t0 = 8 * np.pi * sol.a0
    breaks = pot.breakpoints
    second_moment = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        second_moment += quad(lambda r: r ** 3 * pot(r) * sol.u(r), a, b)[0]
    second_moment *= 4 * np.pi
    constant = regulated_lattice_sum(alpha) - alpha
    bracket = t0 ** 2 * constant / (4 * np.pi ** 2) + t0 * second_moment / (3 * N ** 2)
    return float(-(N - 1) / (4.0 * N) * bracket)
