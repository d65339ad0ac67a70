"""
Unitary transformations of the excitation space.

T(eta) = exp(1/2 sum_p eta_p (b*_p b*_-p - b_p b_-p)) and the cubic e^A are
represented by their real antisymmetric generators. They are exponentiated
densely on small spaces and applied to vectors with expm_multiply otherwise.
"""
import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import expm_multiply

from gpbogo.fockspace.operators import (
    ANNIHILATE,
    CREATE,
    FACTOR,
    SparseOperator,
    Term,
    assemble,
    b_factor,
    excitation_number,
)
from gpbogo.utils.errors import PreconditionError
from gpbogo.utils.logging_config import get_logger

logger = get_logger(__name__)

DENSE_LIMIT = 4000
SYMMETRY_TOL = 1e-14
PLAIN = "plain"
DRESSED = "dressed"

B = (FACTOR, b_factor)


class UnitaryExponential:
    """
    exp(generator) for a real antisymmetric generator.

    Args:
        generator (SparseOperator): Antisymmetric generator on an ExcitationBasis.
    """

    def __init__(self, generator):
        self.generator = generator
        self._dense = None

    @property
    def basis(self):
        return self.generator.basis

    @property
    def info(self):
        return self.generator.info

    def toarray(self):
        if self._dense is None:
            if len(self.basis) > DENSE_LIMIT:
                raise PreconditionError(
                    f"Dense exponential needs dimension <= {DENSE_LIMIT}, got {len(self.basis)}."
                )
            self._dense = linalg.expm(self.generator.toarray())
        return self._dense

    def apply(self, vectors):
        if len(self.basis) <= DENSE_LIMIT:
            return self.toarray() @ vectors
        return expm_multiply(self.generator.tocsr(), vectors)

    def apply_adjoint(self, vectors):
        if len(self.basis) <= DENSE_LIMIT:
            return self.toarray().conj().T @ vectors
        return expm_multiply(-self.generator.tocsr(), vectors)

    def as_operator(self):
        return SparseOperator(self.toarray(), self.basis)

    def unitarity_error(self):
        T = self.toarray()
        return float(np.max(np.abs(T.conj().T @ T - np.eye(len(T)))))


def eta_array(eta, modes):
    """
    Kernel values per mode (0 on the zero mode).

    Args:
        eta (dict or ndarray): Integer vector -> eta, or values per mode.
        modes (ModeSet): Mode set.
    """
    if isinstance(eta, dict):
        values = np.zeros(len(modes))
        outside = 0
        for vector, value in eta.items():
            i = modes.index(vector)
            if i > 0:
                values[i] = value
            elif i < 0 and value != 0:
                outside += 1
        if outside:
            logger.debug("%d kernel entries lie outside the mode set", outside)
    else:
        values = np.asarray(eta, dtype=float).copy()
        if values.shape != (len(modes),):
            raise PreconditionError(f"Kernel needs {len(modes)} entries, got {values.shape}.")
        values[0] = 0.0
    asym = np.max(np.abs(values - values[modes.negation()]))
    if asym > SYMMETRY_TOL:
        raise PreconditionError(f"Kernel is not symmetric under p -> -p (defect {asym:.2e}).")
    return values


def _antisymmetric(basis, terms, info=None):
    X = assemble(basis, terms)
    return SparseOperator((X - X.T).tocsr(), basis, info=info or {})


def pair_generator(eta, basis):
    """1/2 sum_p eta_p (b*_p b*_-p - b_p b_-p)."""
    values = eta_array(eta, basis.modes)
    negation = basis.modes.negation()
    terms = [
        Term(0.5 * values[i], ((CREATE, i), B, (CREATE, negation[i]), B))
        for i in range(1, len(values))
        if values[i] != 0
    ]
    return _antisymmetric(basis, terms, {"pairs": len(terms)})


def build_generalized_bogoliubov(eta, basis):
    """T(eta) on an ExcitationBasis."""
    return UnitaryExponential(pair_generator(eta, basis))


def b_operator(basis, mode):
    """b_p = sqrt((N - N_+)/N) a_p."""
    return SparseOperator(assemble(basis, [Term(1.0, (B, (ANNIHILATE, mode)))]), basis)


def b_star_operator(basis, mode):
    """b*_p = a*_p sqrt((N - N_+)/N)."""
    return SparseOperator(assemble(basis, [Term(1.0, ((CREATE, mode), B))]), basis)


def bogoliubov_residual(T, eta, mode, sector_cap):
    """
    Norm of d_p = T* b_p T - cosh(eta_p) b_p - sinh(eta_p) b*_-p restricted to
    states with at most sector_cap excitations.
    """
    basis = T.basis
    if not 0 < mode < len(basis.modes):
        raise PreconditionError(f"Mode {mode} is not a nonzero mode of the set.")
    values = eta_array(eta, basis.modes)
    minus = basis.modes.negation()[mode]
    columns = basis.sectors_upto(sector_cap)
    block = sparse.identity(len(basis), format="csr")[:, columns].toarray()
    b = b_operator(basis, mode).matrix
    b_star = b_star_operator(basis, minus).matrix
    transformed = T.apply_adjoint(b @ T.apply(block))
    d = transformed - np.cosh(values[mode]) * (b @ block) - np.sinh(values[mode]) * (b_star @ block)
    return float(np.linalg.norm(d, 2))


def build_cubic_generator(eta, high, low, basis, weights=PLAIN, eta_full=None):
    """
    The cubic generator on momenta r in ``high`` and v in ``low``.

    plain:   A = N^-1/2 sum eta_r [b*_{r+v} a*_-r a_v - h.c.]
    dressed: A = N^-1/2 sum eta_r [b*_{r+v} b*_-r (gamma_v b_v + sigma_v b*_-v) - h.c.]
    with gamma_v = cosh(eta_v), sigma_v = sinh(eta_v) of the unfiltered kernel.
    Terms whose momentum r + v lies outside the mode set are dropped and
    counted in ``info["dropped_terms"]``.

    Returns:
        SparseOperator: Antisymmetric generator.
    """
    modes = basis.modes
    high, low = sorted(set(high)), sorted(set(low))
    if set(high) & set(low):
        raise PreconditionError("High and low momentum sets must be disjoint.")
    if 0 in high or 0 in low:
        raise PreconditionError("Momentum sets must not contain the zero mode.")
    if weights not in (PLAIN, DRESSED):
        raise PreconditionError(f"Unknown cubic weights {weights!r}.")
    values = eta_array(eta, modes)
    full = values if eta_full is None else eta_array(eta_full, modes)
    negation = modes.negation()
    prefactor = 1.0 / np.sqrt(basis.N)
    terms, dropped = [], 0
    for r in high:
        if values[r] == 0:
            continue
        for v in low:
            s = modes.index(modes.vectors[r] + modes.vectors[v])
            if s <= 0:
                dropped += 1
                continue
            coeff = prefactor * values[r]
            if weights == PLAIN:
                factors = ((CREATE, s), B, (CREATE, negation[r]), (ANNIHILATE, v))
                terms.append(Term(coeff, factors))
                continue
            head = ((CREATE, s), B, (CREATE, negation[r]), B)
            gamma, sigma = np.cosh(full[v]), np.sinh(full[v])
            terms.append(Term(coeff * gamma, head + (B, (ANNIHILATE, v))))
            if sigma != 0:
                terms.append(Term(coeff * sigma, head + ((CREATE, negation[v]), B)))
    if dropped:
        logger.info("cubic generator: %d terms outside the mode set dropped", dropped)
    return _antisymmetric(basis, terms, {"terms": len(terms), "dropped_terms": dropped})


def exponential(generator):
    return UnitaryExponential(generator)


def number_growth(T, xi, k=1):
    """<T xi, (N_+ + 1)^k T xi> / <xi, (N_+ + 1)^k xi>."""
    weight = (excitation_number(T.basis).matrix.diagonal() + 1.0) ** k
    moved = T.apply(xi)
    return float(np.vdot(moved, weight * moved).real / np.vdot(xi, weight * xi).real)
