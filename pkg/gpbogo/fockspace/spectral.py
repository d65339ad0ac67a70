"""
Eigenpairs, conjugation and overlaps on the truncated Fock space.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from gpbogo.fockspace.operators import SparseOperator
from gpbogo.utils.errors import ConvergenceError, PreconditionError
from gpbogo.utils.logging_config import get_logger

logger = get_logger(__name__)

DENSE_LIMIT = 2000
EIGSH_TOL = 1e-12
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class GroundState:
    energy: float
    vector: np.ndarray
    residual: float


def _dense(op):
    return op.toarray() if hasattr(op, "toarray") else np.asarray(op)


def ground_state(H, tol=EIGSH_TOL, maxiter=None, seed=None):
    """
    Lowest eigenpair of a hermitian operator.

    Small operators are diagonalized densely; larger ones with eigsh from the
    normalized all-ones start vector (or a seeded random one).

    Raises:
        ConvergenceError: eigsh fails, or the residual |Hv - Ev| exceeds 1e-9.
    """
    matrix = H.matrix if isinstance(H, SparseOperator) else H
    D = matrix.shape[0]
    if D <= DENSE_LIMIT:
        values, vectors = linalg.eigh(_dense(H), subset_by_index=[0, 0])
        energy, vector = float(values[0]), vectors[:, 0]
    else:
        if seed is None:
            v0 = np.ones(D) / np.sqrt(D)
        else:
            v0 = np.random.default_rng(seed).standard_normal(D)
        try:
            values, vectors = eigsh(matrix, k=1, which="SA", v0=v0, tol=tol, maxiter=maxiter)
        except ArpackNoConvergence as err:
            raise ConvergenceError(f"eigsh did not converge on dimension {D}: {err}")
        energy, vector = float(values[0]), vectors[:, 0]
    vector = vector / np.linalg.norm(vector)
    residual = float(np.linalg.norm(matrix @ vector - energy * vector))
    if residual > RESIDUAL_TOL:
        raise ConvergenceError(f"Ground-state residual {residual:.2e} above {RESIDUAL_TOL}.")
    logger.debug("ground state: E=%.12g, residual %.1e, dimension %d", energy, residual, D)
    return GroundState(energy, vector, residual)


def spectrum(H):
    """Sorted eigenvalues of a hermitian operator, dense."""
    return linalg.eigvalsh(_dense(H))


def conjugate(H, W):
    """
    W* H W for a unitary W (SparseOperator or UnitaryExponential).
    """
    Wd = _dense(W)
    Hd = _dense(H)
    if Wd.shape[0] != Hd.shape[0]:
        raise PreconditionError(f"Shapes {Wd.shape} and {Hd.shape} do not match.")
    basis = W.basis if hasattr(W, "basis") else getattr(H, "basis", None)
    hermitian = getattr(H, "hermitian", False)
    return SparseOperator(Wd.conj().T @ Hd @ Wd, basis, hermitian=hermitian)


def overlap(psi, phi):
    """|<psi, phi>|^2 for normalized vectors."""
    value = abs(np.vdot(psi, phi)) ** 2 / (np.vdot(psi, psi).real * np.vdot(phi, phi).real)
    return float(min(value, 1.0))
