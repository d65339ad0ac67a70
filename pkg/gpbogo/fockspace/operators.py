"""
Second-quantized operators on occupation bases.

Operators are built from monomials, products of creation ("c"), annihilation
("a") and diagonal ("f") factors written left to right and applied right to
left to every basis state at once. On an ExcitationBasis the zero-momentum
operators are translated with the excitation-map rules: a_0 and a*_0 act as the
multiplication by sqrt(n_0) and sqrt(n_0 + 1), where n_0 starts at N - N_+
and follows the zero-momentum factors already applied.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from gpbogo.potential import rescale
from gpbogo.utils.errors import PreconditionError
from gpbogo.utils.logging_config import get_logger

logger = get_logger(__name__)

CREATE = "c"
ANNIHILATE = "a"
FACTOR = "f"


@dataclass(frozen=True)
class Term:
    """coeff * product of factors; factors are (kind, mode or callable)."""

    coeff: float
    factors: tuple
    label: str = ""

    def legs(self):
        return [arg for kind, arg in self.factors if kind != FACTOR]

    def zero_legs(self):
        return sum(1 for leg in self.legs() if leg == 0)


def b_factor(states, excitations, N):
    return np.sqrt(np.clip(N - excitations, 0, None) / N)


def apply_term(basis, term):
    """
    Matrix elements <row| term |col> over the whole basis.

    Returns:
        tuple: (rows, cols, values) of the nonzero elements.
    """
    states = basis.states.copy()
    cols = np.arange(len(basis))
    amp = np.full(len(basis), float(term.coeff))
    excitations = basis.excitations.copy()
    n0 = basis.N - excitations
    for kind, arg in reversed(term.factors):
        if kind == FACTOR:
            amp = amp * arg(states, excitations, basis.N)
        elif basis.condensate and arg == 0:
            if kind == ANNIHILATE:
                amp = amp * np.sqrt(np.clip(n0, 0, None))
                n0 = n0 - 1
            else:
                n0 = n0 + 1
                amp = amp * np.sqrt(np.clip(n0, 0, None))
        else:
            col = basis.mode_column(arg)
            if kind == ANNIHILATE:
                amp = amp * np.sqrt(np.clip(states[:, col], 0, None))
                states[:, col] -= 1
                if arg != 0:
                    excitations = excitations - 1
            else:
                states[:, col] += 1
                amp = amp * np.sqrt(states[:, col])
                if arg != 0:
                    excitations = excitations + 1
        keep = amp != 0
        if not np.all(keep):
            states, cols, amp, excitations, n0 = (
                states[keep],
                cols[keep],
                amp[keep],
                excitations[keep],
                n0[keep],
            )
        if not len(amp):
            break
    rows = basis.lookup(states) if len(amp) else np.zeros(0, dtype=np.int64)
    found = rows >= 0
    return rows[found], cols[found], amp[found]


def assemble(basis, terms, target=None):
    """Sums the terms into a CSR matrix over basis (rows in target if given)."""
    target = basis if target is None else target
    parts = [apply_term(basis, t) for t in terms]
    if parts:
        rows, cols, vals = (np.concatenate(x) for x in zip(*parts))
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0)
    return sparse.coo_matrix(
        (vals, (rows, cols)), shape=(len(target), len(basis))
    ).tocsr()


@dataclass(frozen=True)
class SparseOperator:
    """
    A matrix on a basis, CSR or dense.

    Args:
        matrix: scipy sparse matrix or ndarray.
        basis: Basis of the columns (and rows unless ``target`` is set).
        hermitian (bool): Constructed to be hermitian.
        block_diagonal (bool): Commutes with the excitation number.
        target: Basis of the rows for maps between bases.
        info (dict): Construction report, e.g. dropped terms.
    """

    matrix: object
    basis: object
    hermitian: bool = False
    block_diagonal: bool = False
    target: object = None
    info: dict = field(default_factory=dict, compare=False)

    @property
    def shape(self):
        return self.matrix.shape

    def toarray(self):
        if sparse.issparse(self.matrix):
            return self.matrix.toarray()
        return np.asarray(self.matrix)

    def tocsr(self):
        return sparse.csr_matrix(self.matrix)

    def adjoint(self):
        return SparseOperator(
            self.matrix.conj().T,
            (self.target if self.target is not None else self.basis),
            self.hermitian,
            self.block_diagonal,
            target=self.basis if self.target is not None else None,
        )

    def __matmul__(self, other):
        if isinstance(other, SparseOperator):
            return SparseOperator(self.matrix @ other.matrix, other.basis, target=self.target)
        return self.matrix @ other

    def __add__(self, other):
        return SparseOperator(
            self.matrix + other.matrix,
            self.basis,
            self.hermitian and other.hermitian,
            self.block_diagonal and other.block_diagonal,
        )

    def expectation(self, vector):
        return float(np.real(np.vdot(vector, self.matrix @ vector)))

    def hermiticity_error(self):
        diff = self.matrix - self.matrix.conj().T
        if sparse.issparse(diff):
            return float(abs(diff).max()) if diff.nnz else 0.0
        return float(np.max(np.abs(diff))) if diff.size else 0.0

    def sector_distance(self):
        """Largest change of the excitation number across a nonzero element."""
        coo = sparse.coo_matrix(self.matrix)
        mask = np.abs(coo.data) > 1e-14
        if not np.any(mask):
            return 0
        target = (self.target if self.target is not None else self.basis)
        rows = target.excitations[coo.row[mask]]
        cols = self.basis.excitations[coo.col[mask]]
        return int(np.max(np.abs(rows - cols)))


def diagonal_operator(basis, values, **kwargs):
    matrix = sparse.diags(np.asarray(values, dtype=float)).tocsr()
    return SparseOperator(matrix, basis, True, True, **kwargs)


def excitation_number(basis):
    return diagonal_operator(basis, basis.excitations)


def total_number(basis):
    return diagonal_operator(basis, basis.states.sum(1))


def operator(basis, factors, coeff=1.0):
    """Single monomial as a SparseOperator, e.g. [("c", p), ("a", 0)]."""
    return SparseOperator(assemble(basis, [Term(coeff, tuple(factors))]), basis)


def kinetic_terms(modes):
    return [
        Term(p2, ((CREATE, i), (ANNIHILATE, i)), "kinetic")
        for i, p2 in enumerate(modes.p2)
        if p2 > 0
    ]


def interaction_terms(pot, N, beta, kappa, modes):
    """
    The terms (kappa/2N) V^(r/N^beta) a*_{p+r} a*_q a_p a_{q+r} with every leg
    in the mode set.

    Returns:
        tuple: (list of Term, number of dropped terms).
    """
    scaled = rescale(pot, N, beta, kappa)
    vectors = modes.vectors
    K = len(modes)
    differences = vectors[None, :, :] - vectors[:, None, :]
    norms = 2 * np.pi * np.sqrt((differences ** 2).sum(-1))
    vhat = scaled.fourier_transform(norms)
    terms, dropped = [], 0
    for p in range(K):
        for s in range(K):
            r = vectors[s] - vectors[p]
            weight = 0.5 * vhat[p, s]
            for q in range(K):
                t = modes.index(vectors[q] + r)
                if t < 0:
                    dropped += 1
                    continue
                if weight == 0:
                    continue
                factors = ((CREATE, s), (CREATE, q), (ANNIHILATE, p), (ANNIHILATE, t))
                terms.append(Term(weight, factors, "interaction"))
    return terms, dropped


def hamiltonian_terms(pot, N, beta, kappa, modes):
    terms, dropped = interaction_terms(pot, N, beta, kappa, modes)
    return kinetic_terms(modes) + terms, dropped


def build_hamiltonian(pot, N, beta, kappa, basis):
    """
    H = sum_p p^2 a*_p a_p + (kappa/2N) sum V^(r/N^beta) a*_{p+r} a*_q a_p a_{q+r}
    on a FockBasis (or, translated, on an ExcitationBasis).
    """
    if basis.N != N:
        raise PreconditionError(f"Basis holds {basis.N} particles, not {N}.")
    terms, dropped = hamiltonian_terms(pot, N, beta, kappa, basis.modes)
    logger.info("Hamiltonian: %d terms, %d dropped by the mode cutoff", len(terms), dropped)
    matrix = assemble(basis, terms)
    return SparseOperator(
        matrix, basis, hermitian=True, info={"terms": len(terms), "dropped_terms": dropped}
    )


def excitation_map(fock_basis, excitation_basis):
    """
    U_N as the relabeling |n_0, n_+> -> |n_+>, a permutation matrix from the
    Fock basis to the excitation basis.
    """
    if fock_basis.N != excitation_basis.N or len(fock_basis.modes) != len(excitation_basis.modes):
        raise PreconditionError("Fock and excitation bases do not match.")
    rows = excitation_basis.lookup(fock_basis.states[:, 1:])
    if np.any(rows < 0):
        raise PreconditionError("Excitation basis misses states of the Fock basis.")
    D = len(fock_basis)
    matrix = sparse.csr_matrix((np.ones(D), (rows, np.arange(D))), shape=(D, D))
    return SparseOperator(matrix, fock_basis, block_diagonal=True, target=excitation_basis)


def conjugate_by_map(H, U):
    """U H U* for the excitation map (or any operator between two bases)."""
    matrix = U.matrix @ H.matrix @ U.matrix.conj().T
    return SparseOperator(matrix, U.target, H.hermitian, info=dict(H.info))


def excitation_hamiltonian_parts(pot, N, beta, kappa, basis):
    """
    U_N H_N U_N* on an ExcitationBasis, split by the condensate legs of each
    monomial.

    Part 0 collects the four-condensate term and the direct terms (r = 0) with
    two condensate legs, part 2 the kinetic, exchange and pairing terms, part 3
    the terms with one condensate leg and part 4 those without.

    Returns:
        dict: {0, 2, 3, 4} -> SparseOperator.
    """
    terms, dropped = hamiltonian_terms(pot, N, beta, kappa, basis.modes)
    groups = {0: [], 2: [], 3: [], 4: []}
    for term in terms:
        zeros = term.zero_legs()
        if term.label == "kinetic":
            groups[2].append(term)
        elif zeros == 4:
            groups[0].append(term)
        elif zeros == 2:
            out1, out2, in1, in2 = term.legs()
            direct = (out1 == in1 == 0) or (out2 == in2 == 0)
            groups[0 if direct else 2].append(term)
        elif zeros == 1:
            groups[3].append(term)
        else:
            groups[4].append(term)
    parts = {}
    for key, group in groups.items():
        parts[key] = SparseOperator(
            assemble(basis, group),
            basis,
            hermitian=True,
            block_diagonal=key in (0, 4),
            info={"terms": len(group)},
        )
    parts[4].info["dropped_terms"] = dropped
    return parts


def condensate_energy(pot, N, kappa, basis):
    """kappa V^(0) (N - N_+)(N - 1 + N_+)/(2N) on an ExcitationBasis."""
    vhat0 = rescale(pot, N, 0.0, kappa).fourier_transform(0.0)
    n = basis.excitations
    return vhat0 * (N - n) * (N - 1 + n) / 2
