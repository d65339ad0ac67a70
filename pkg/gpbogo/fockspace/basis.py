"""
Truncated momentum modes and occupation-number bases.

A ModeSet is a finite set of integer vectors n (momentum 2 pi n) that contains 0
at index 0 and is closed under n -> -n. FockBasis holds the N-particle
occupation vectors over all modes; ExcitationBasis holds the occupations of the
nonzero modes with at most N excitations. Both are ordered by excitation
number and then lexicographically, and look states up by integer keys.
"""
import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from gpbogo.lattice import MomentumLattice
from gpbogo.utils.errors import BasisTooLargeError, PreconditionError
from gpbogo.utils.logging_config import get_logger

logger = get_logger(__name__)

MAX_DIMENSION = 200_000


def _sorted_modes(vectors):
    vectors = np.unique(np.asarray(vectors, dtype=np.int64).reshape(-1, 3), axis=0)
    norms = (vectors ** 2).sum(1)
    order = np.lexsort((vectors[:, 2], vectors[:, 1], vectors[:, 0], norms))
    return vectors[order]


@dataclass(frozen=True)
class ModeSet:
    """
    Args:
        vectors (ndarray): (K, 3) integer vectors, zero first.
    """

    vectors: np.ndarray

    def __post_init__(self):
        vectors = _sorted_modes(self.vectors)
        if len(vectors) == 0 or np.any(vectors[0] != 0):
            raise PreconditionError("A mode set must contain the zero momentum.")
        lookup = {tuple(v): i for i, v in enumerate(vectors.tolist())}
        for v in lookup:
            if tuple(-x for x in v) not in lookup:
                raise PreconditionError(f"Mode set is not closed under negation at {v}.")
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "_lookup", lookup)

    @classmethod
    def from_cutoff(cls, p_max):
        """All n with 2 pi |n| <= p_max."""
        if p_max < 0:
            raise PreconditionError(f"p_max must be >= 0, got {p_max}.")
        level = int(np.floor((p_max / (2 * np.pi)) ** 2 * (1 + 1e-12)))
        return cls(MomentumLattice(order="shell", exclude_zero=False).points(level))

    @classmethod
    def from_momenta(cls, vectors):
        """The given integer vectors, their negatives and zero."""
        vectors = np.asarray(vectors, dtype=np.int64).reshape(-1, 3)
        return cls(np.concatenate([np.zeros((1, 3), dtype=np.int64), vectors, -vectors]))

    def __len__(self):
        return len(self.vectors)

    @property
    def momenta(self):
        return 2 * np.pi * self.vectors

    @property
    def p2(self):
        """|p|^2 per mode."""
        return (2 * np.pi) ** 2 * (self.vectors ** 2).sum(1).astype(float)

    @property
    def norms(self):
        return np.sqrt(self.p2)

    def index(self, vector):
        """Index of an integer vector, or -1 outside the set."""
        return self._lookup.get(tuple(int(x) for x in vector), -1)

    def negation(self):
        return np.array([self.index(-v) for v in self.vectors])

    def select(self, low=0.0, high=np.inf):
        """Indices of nonzero modes with low <= |p| <= high."""
        norms = self.norms
        return [i for i in range(1, len(self)) if low <= norms[i] <= high]


def _dimension(K, N):
    return math.comb(K + N - 1, N)


def _enumerate(K, N):
    """All occupation vectors over K modes summing to N."""
    combos = np.array(list(combinations_with_replacement(range(K), N)), dtype=np.int64)
    states = np.zeros((len(combos), K), dtype=np.int64)
    rows = np.repeat(np.arange(len(combos)), N)
    np.add.at(states, (rows, combos.ravel()), 1)
    return states


class _OccupationBasis:
    """Sorted occupation vectors with vectorized lookup."""

    def __init__(self, modes, N, states, excitations):
        order = np.lexsort(tuple(-states[:, ::-1].T) + (excitations,))
        self.modes = modes
        self.N = int(N)
        self.states = states[order]
        self.excitations = excitations[order]
        self.states.setflags(write=False)
        self.excitations.setflags(write=False)
        width = self.states.shape[1]
        self._base = self.N + 1
        if width * math.log2(self._base) < 62:
            self._powers = self._base ** np.arange(width, dtype=np.int64)
            keys = self.states @ self._powers
            self._order = np.argsort(keys)
            self._keys = keys[self._order]
            self._table = None
        else:
            self._powers = None
            self._table = {tuple(s): i for i, s in enumerate(self.states.tolist())}

    def __len__(self):
        return len(self.states)

    @property
    def dimension(self):
        return len(self.states)

    def lookup(self, states):
        """Row indices of the given occupation vectors, -1 for states outside the basis."""
        states = np.asarray(states, dtype=np.int64)
        valid = np.all((states >= 0) & (states <= self.N), axis=1)
        out = np.full(len(states), -1, dtype=np.int64)
        if self._table is not None:
            for i in np.nonzero(valid)[0]:
                out[i] = self._table.get(tuple(states[i].tolist()), -1)
            return out
        keys = states[valid] @ self._powers
        pos = np.searchsorted(self._keys, keys)
        pos = np.minimum(pos, len(self._keys) - 1)
        hit = self._keys[pos] == keys
        found = np.full(len(keys), -1, dtype=np.int64)
        found[hit] = self._order[pos[hit]]
        out[valid] = found
        return out

    def sector(self, k):
        """Indices of states with exactly k excitations."""
        return np.nonzero(self.excitations == k)[0]

    def sectors_upto(self, k):
        return np.nonzero(self.excitations <= k)[0]


class FockBasis(_OccupationBasis):
    """N-particle occupation vectors over every mode, mode 0 included."""

    condensate = False

    def __init__(self, modes, N, states):
        states = np.asarray(states, dtype=np.int64)
        super().__init__(modes, N, states, N - states[:, 0])

    def mode_column(self, mode):
        return mode


class ExcitationBasis(_OccupationBasis):
    """Occupations of the nonzero modes with at most N excitations."""

    condensate = True

    def __init__(self, modes, N, states):
        states = np.asarray(states, dtype=np.int64)
        super().__init__(modes, N, states, states.sum(1))

    def mode_column(self, mode):
        if mode == 0:
            raise PreconditionError("The excitation space has no zero-momentum mode.")
        return mode - 1

    @property
    def vacuum(self):
        v = np.zeros(len(self))
        v[self.lookup(np.zeros((1, len(self.modes) - 1), dtype=np.int64))[0]] = 1.0
        return v


def _check_dimension(K, N, limit):
    if N < 1:
        raise PreconditionError(f"N must be >= 1, got {N}.")
    dimension = _dimension(K, N)
    if dimension > limit:
        raise BasisTooLargeError(dimension, limit)
    return dimension


def build_basis(N, modes, limit=MAX_DIMENSION):
    """
    Enumerates the N-particle Fock basis.

    Args:
        N (int): Particle number, >= 1.
        modes (ModeSet or float): Mode set, or a cutoff p_max for ModeSet.from_cutoff.
        limit (int): Largest admissible dimension.

    Returns:
        FockBasis
    """
    if not isinstance(modes, ModeSet):
        modes = ModeSet.from_cutoff(modes)
    dimension = _check_dimension(len(modes), N, limit)
    logger.info("Fock basis N=%d, %d modes: dimension %d", N, len(modes), dimension)
    return FockBasis(modes, N, _enumerate(len(modes), N))


def build_excitation_basis(N, modes, limit=MAX_DIMENSION):
    """Occupations of the nonzero modes with excitation number <= N."""
    if not isinstance(modes, ModeSet):
        modes = ModeSet.from_cutoff(modes)
    _check_dimension(len(modes), N, limit)
    # the zero mode of an N-particle state plays the slack variable
    return ExcitationBasis(modes, N, _enumerate(len(modes), N)[:, 1:])
