"""
Staged renormalization of the truncated many-body Hamiltonian.

The cascade conjugates H_N step by step:
    L_N = U_N H_N U_N*                     (excitation map)
    G_N = T(eta_H)* L_N T(eta_H)           (quadratic, scattering correlations)
    J_N = e^-A G_N e^A                     (cubic, dressed generator)
    M_N = T(tau)* J_N T(tau)               (diagonalizing quadratic)
and records vacuum expectations, spectra and overlaps after every stage.
"""
import numpy as np
from tqdm.auto import tqdm

from gpbogo.bogoliubov import bogoliubov_approximation_tau, renormalized_coefficients
from gpbogo.fockspace import (
    DRESSED,
    ModeSet,
    build_basis,
    build_cubic_generator,
    build_excitation_basis,
    build_generalized_bogoliubov,
    build_hamiltonian,
    condensate_energy,
    conjugate,
    conjugate_by_map,
    excitation_hamiltonian_parts,
    excitation_map,
    exponential,
    ground_state,
    overlap,
    spectrum,
)
from gpbogo.potential import fourier_transform, scaled
from gpbogo.scattering import eta_kernel, solve_neumann
from gpbogo.utils.errors import PreconditionError
from gpbogo.utils.logging_config import get_logger

logger = get_logger(__name__)


def overlap_diagnostic(psi, vacuum, *factors):
    """
    |<psi, F_1 ... F_k Omega>|^2 for a trial state built from the vacuum.

    Args:
        psi (ndarray): Exact ground state in the excitation basis (U_N psi_N).
        vacuum (ndarray): Excitation vacuum Omega.
        factors: Unitaries with an ``apply`` method, leftmost first.
    """
    state = vacuum
    for factor in reversed(factors):
        state = factor.apply(state)
    return overlap(psi, state)


class Cascade(object):
    def __init__(
        self,
        pot,
        N,
        modes,
        beta=1.0,
        kappa=1.0,
        mu=None,
        nu=None,
        weights=DRESSED,
    ):
        """
        Exact-diagonalization check of the renormalization steps.

        Args:
            pot (RadialPotential): Unscaled potential V.
            N (int): Particle number.
            modes (ModeSet or float): Mode set, or a momentum cutoff p_max.
            beta (float): Scaling exponent, 1 for Gross-Pitaevskii, 0 for mean field.
            kappa (float): Coupling constant.
            mu (float): Cutoff of the high-momentum kernel eta_H, and lower
                bound of the high set of the cubic generator. Defaults to the
                largest momentum of the mode set.
            nu (float): Upper bound of the low set of the cubic generator,
                nu < mu. Defaults to the smallest nonzero momentum.
            weights (str): "plain" or "dressed" cubic generator.
        """
        self.pot = pot
        self.N = int(N)
        self.modes = modes if isinstance(modes, ModeSet) else ModeSet.from_cutoff(modes)
        if len(self.modes) < 3:
            raise PreconditionError("The mode set needs nonzero momenta.")
        self.beta = float(beta)
        self.kappa = float(kappa)
        norms = self.modes.norms[1:]
        self.mu = float(norms.max() if mu is None else mu)
        self.nu = float(norms.min() if nu is None else nu)
        if not 0 < self.nu <= self.mu:
            raise PreconditionError(f"Need 0 < nu <= mu, got nu={self.nu}, mu={self.mu}.")
        self.weights = weights
        self.interaction = scaled(pot, 1.0, self.kappa)
        self.stages = []
        self.report = {}

    @property
    def high(self):
        return self.modes.select(low=self.mu)

    @property
    def low(self):
        return [i for i in self.modes.select(high=self.nu) if i not in self.high]

    def _per_mode(self, func):
        """Evaluates a radial function once per shell of the mode set."""
        norms = self.modes.norms
        shells, inverse = np.unique(np.round(norms, 12), return_inverse=True)
        values = np.array([func(p) if p > 0 else 0.0 for p in shells])
        return values[inverse]

    def build(self):
        """Fock basis, Hamiltonian and exact ground state."""
        self.fock = build_basis(self.N, self.modes)
        self.H = build_hamiltonian(self.pot, self.N, self.beta, self.kappa, self.fock)
        self.exact = ground_state(self.H)
        self.eigenvalues = spectrum(self.H)
        self.excitation = build_excitation_basis(self.N, self.modes)
        self.U = excitation_map(self.fock, self.excitation)
        self.vacuum = self.excitation.vacuum
        self.psi = self.U @ self.exact.vector

    def kernels(self):
        """eta (full and high-momentum part), tau and the plain Bogoliubov angles."""
        p = self.modes.norms
        if self.beta == 1.0:
            sol = solve_neumann(self.interaction, self.N)
            self.eta_full = self._per_mode(lambda q: eta_kernel(sol, q))
            self.eta_high = np.where(p >= self.mu, self.eta_full, 0.0)
            coeffs = renormalized_coefficients(
                self.interaction, self.N, self.mu, p[1:], sol=sol
            )
            self.tau = np.concatenate([[0.0], coeffs.tau])
        else:
            self.eta_full = np.zeros(len(p))
            self.eta_high = np.zeros(len(p))
            self.tau = self._plain_tau()
        self.plain_tau = self._plain_tau()

    def _plain_tau(self):
        scale = float(self.N) ** self.beta
        p = self.modes.norms[1:]
        return np.concatenate(
            [[0.0], bogoliubov_approximation_tau(self.pot, scale, p, self.kappa)]
        )

    def _record(self, name, operator, transform=None):
        stage = {
            "name": name,
            "vacuum_expectation": operator.expectation(self.vacuum),
            "hermiticity_error": operator.hermiticity_error(),
            "spectrum_error": float(np.max(np.abs(spectrum(operator) - self.eigenvalues))),
        }
        if transform is not None:
            stage["unitarity_error"] = transform.unitarity_error()
            stage["dropped_terms"] = int(transform.info.get("dropped_terms", 0))
        self.stages.append(stage)
        logger.info("%s: <vac, H vac> = %.10g", name, stage["vacuum_expectation"])
        return stage

    def excitation_stage(self):
        parts = excitation_hamiltonian_parts(
            self.pot, self.N, self.beta, self.kappa, self.excitation
        )
        self.parts = parts
        self.L = parts[0] + parts[2] + parts[3] + parts[4]
        direct = conjugate_by_map(self.H, self.U)
        self.report["excitation_map_error"] = float(
            np.max(np.abs(self.L.toarray() - direct.toarray()))
        )
        self.report["sector_distance"] = self.L.sector_distance()
        diagonal = condensate_energy(self.pot, self.N, self.kappa, self.excitation)
        self.report["condensate_energy_error"] = float(
            np.max(np.abs(parts[0].toarray() - np.diag(diagonal)))
        )
        self._record("excitation", self.L)

    def quadratic_stage(self):
        self.T = build_generalized_bogoliubov(self.eta_high, self.excitation)
        self.G = conjugate(self.L, self.T)
        self._record("quadratic", self.G, self.T)

    def cubic_stage(self):
        generator = build_cubic_generator(
            self.eta_high,
            self.high,
            self.low,
            self.excitation,
            weights=self.weights,
            eta_full=self.eta_full,
        )
        self.A = exponential(generator)
        self.J = conjugate(self.G, self.A)
        self._record("cubic", self.J, self.A)

    def diagonal_stage(self):
        self.T_tau = build_generalized_bogoliubov(self.tau, self.excitation)
        self.M = conjugate(self.J, self.T_tau)
        self._record("diagonal", self.M, self.T_tau)

    def overlaps(self):
        plain = build_generalized_bogoliubov(self.plain_tau, self.excitation)
        return {
            "condensate": overlap_diagnostic(self.psi, self.vacuum),
            "quadratic": overlap_diagnostic(self.psi, self.vacuum, self.T),
            "full": overlap_diagnostic(self.psi, self.vacuum, self.T, self.A, self.T_tau),
            "plain_bogoliubov": overlap_diagnostic(self.psi, self.vacuum, plain),
        }

    def bogoliubov_prediction(self):
        """kappa V^(0)(N-1)/2 + 1/2 sum [sqrt(p^4 + 2 p^2 v_p) - p^2 - v_p] on the modes."""
        scale = float(self.N) ** self.beta
        p = self.modes.norms[1:]
        v = self.kappa * fourier_transform(self.pot, p / scale)
        v0 = self.kappa * fourier_transform(self.pot, 0.0)
        root = np.sqrt(p ** 4 + 2 * p * p * v)
        return float(v0 * (self.N - 1) / 2 + 0.5 * np.sum(root - p * p - v))

    def run(self, pbar=True):
        steps = [
            ("build", self.build),
            ("kernels", self.kernels),
            ("excitation", self.excitation_stage),
            ("quadratic", self.quadratic_stage),
            ("cubic", self.cubic_stage),
            ("diagonal", self.diagonal_stage),
        ]
        loop = tqdm(steps, "Cascade") if pbar else steps
        for name, step in loop:
            if pbar:
                loop.set_postfix_str(name)
            step()
        self.report.update(
            {
                "N": self.N,
                "beta": self.beta,
                "kappa": self.kappa,
                "mu": self.mu,
                "nu": self.nu,
                "dimension": len(self.fock),
                "E_exact": self.exact.energy,
                "E_bogoliubov_prediction": self.bogoliubov_prediction(),
                "stages": self.stages,
                "overlaps": self.overlaps(),
                "dropped_terms": {
                    "hamiltonian": int(self.H.info["dropped_terms"]),
                    "cubic": int(self.A.info["dropped_terms"]),
                },
            }
        )
        return self.report
