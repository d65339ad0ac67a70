import numpy as np
import pytest

from gpbogo.bogoliubov import (
    BogoliubovCoefficients,
    DispersionParams,
    OccupationList,
    bogoliubov_approximation_tau,
    bogoliubov_energy_mf,
    coefficient_shells,
    depletion_closed_form,
    depletion_integral,
    diagonalization_constant,
    dispersion,
    excitation_energy,
    ground_state_energy_gp,
    lhy_energy_per_particle,
    renormalized_coefficients,
    sound_velocity,
)
from gpbogo.checks import check_coefficient_pipeline, check_depletion
from gpbogo.lattice import LHY_COEFFICIENT
from gpbogo.potential import fourier_transform
from gpbogo.utils.errors import (
    DilutenessWarning,
    NegativeFourierWarning,
    PreconditionError,
)

E_LAMBDA = 1.5 + 8.913633


def test_dispersion_limits():
    a0 = 0.1
    assert dispersion(0.0, 3.0) == pytest.approx(9.0)
    assert dispersion(a0, 1e-6) / 1e-6 == pytest.approx(sound_velocity(a0), rel=1e-9)
    p = np.array([1.0, 10.0, 100.0])
    np.testing.assert_allclose(dispersion(a0, p), np.sqrt(p ** 4 + 16 * np.pi * a0 * p ** 2))
    assert isinstance(dispersion(a0, 2.0), float)
    with pytest.raises(PreconditionError):
        dispersion(-1.0, 1.0)


def test_dispersion_params():
    params = DispersionParams(0.25, rho=2.0)
    assert params.sound_velocity == pytest.approx(np.sqrt(4 * np.pi))
    assert params.dispersion(1.0) == pytest.approx(np.sqrt(1 + 4 * np.pi))
    with pytest.raises(PreconditionError):
        DispersionParams(-0.1)
    with pytest.raises(PreconditionError):
        DispersionParams(0.1, rho=0.0)


def test_occupation_list_parse_and_merge():
    occ = OccupationList.parse("1/0/0:2, 0/-1/0:1,1/0/0:1")
    assert occ.entries == (((0, -1, 0), 1), ((1, 0, 0), 3))
    p, counts = occ.momenta()
    np.testing.assert_allclose(p, [2 * np.pi, 2 * np.pi])
    np.testing.assert_array_equal(counts, [1, 3])
    merged = occ + OccupationList.from_mapping({(0, -1, 0): 2})
    assert dict(merged.entries)[(0, -1, 0)] == 3
    assert OccupationList().momenta()[0].size == 0


@pytest.mark.parametrize(
    "make",
    [
        lambda: OccupationList.parse("1/0:2"),
        lambda: OccupationList.parse("1/0/0"),
        lambda: OccupationList.parse("0/0/0:1"),
        lambda: OccupationList((((1, 0, 0), -1),)),
        lambda: OccupationList((((1, 0, 0), 1.5),)),
    ],
)
def test_occupation_list_errors(make):
    with pytest.raises(PreconditionError):
        make()


def test_excitation_energy():
    a0 = 0.05
    occ = OccupationList.parse("1/0/0:3,1/1/0:1")
    expected = 3 * dispersion(a0, 2 * np.pi) + dispersion(a0, 2 * np.pi * np.sqrt(2))
    assert excitation_energy(a0, occ) == pytest.approx(expected, rel=1e-14)
    assert excitation_energy(a0, OccupationList()) == 0.0


def test_excitation_energy_is_additive():
    a0 = 0.02
    first = OccupationList.parse("1/0/0:2,0/1/1:1")
    second = OccupationList.parse("-1/0/0:1,2/0/0:3")
    together = excitation_energy(a0, first + second)
    assert together == pytest.approx(
        excitation_energy(a0, first) + excitation_energy(a0, second), rel=1e-14
    )


def test_depletion_is_monotone_on_grid():
    rho = np.array([0.5, 1.0, 2.0])
    a0 = np.array([0.005, 0.01, 0.02])
    table = np.array([[depletion_integral(r, 8 * np.pi * a) for a in a0] for r in rho])
    assert np.all(np.diff(table, axis=0) > 0)
    assert np.all(np.diff(table, axis=1) > 0)


def test_depletion_matches_closed_form():
    result = check_depletion()
    assert result.passed, result.details
    assert depletion_integral(0.0, 1.0) == 0.0
    assert depletion_closed_form(1.0, 0.0) == 0.0


def test_depletion_kernels(weak_well):
    assert 0 < depletion_integral(0.1, 1.0) < depletion_integral(0.1, 2.0)
    # the square well transform changes sign
    with pytest.raises(PreconditionError):
        depletion_integral(0.1, weak_well)
    with pytest.raises(PreconditionError):
        depletion_integral(-1.0, 1.0)


def test_lhy_energy():
    rho, a0 = 1e-3, 0.1
    gas = rho * a0 ** 3
    expected = 4 * np.pi * rho * a0 * (1 + LHY_COEFFICIENT * np.sqrt(gas))
    assert lhy_energy_per_particle(rho, a0) == pytest.approx(expected, rel=1e-14)
    with pytest.warns(DilutenessWarning):
        lhy_energy_per_particle(1.0, 0.5)
    with pytest.raises(PreconditionError):
        lhy_energy_per_particle(0.0, 0.1)


def test_continuum_energy_reproduces_lhy():
    rho, a0 = 1.0, 1e-3
    energy = bogoliubov_energy_mf(rho, 8 * np.pi * a0, continuum=True)
    assert energy["line1"] == pytest.approx(4 * np.pi * rho * a0, rel=1e-14)
    correction = 4 * np.pi * rho * a0 * LHY_COEFFICIENT * np.sqrt(rho * a0 ** 3)
    assert energy["line2"] == pytest.approx(correction, rel=1e-6)
    assert energy["total"] == pytest.approx(lhy_energy_per_particle(rho, a0), rel=1e-9)


def test_continuum_energy_of_potential(weak_well):
    with pytest.warns(NegativeFourierWarning):
        energy = bogoliubov_energy_mf(0.01, weak_well, continuum=True)
    assert energy["line2"] > 0
    assert energy["line1"] < 0.5 * 0.01 * fourier_transform(weak_well, 0.0)


def test_lattice_energy_constant_kernel():
    energy = bogoliubov_energy_mf(1.0, 0.5, N=10, M_max=4)
    assert energy["line1"] < 0.5 * 10 * 0.5
    assert energy["line2"] > 0
    assert energy["total"] == pytest.approx(energy["line1"] + energy["line2"])


def test_lattice_energy_warns_on_negative_transform(well):
    with pytest.warns(NegativeFourierWarning):
        bogoliubov_energy_mf(1.0, well, N=4, M_max=2)
    with pytest.raises(PreconditionError):
        bogoliubov_energy_mf(1.0, well)
    with pytest.raises(PreconditionError):
        bogoliubov_energy_mf(0.0, well, N=4)


def test_coefficients_without_kernel(well):
    p = 2 * np.pi
    coeffs = renormalized_coefficients(well, 100, 10 * p, [p])
    assert isinstance(coeffs, BogoliubovCoefficients)
    assert coeffs.sigma[0] == 0.0 and coeffs.gamma[0] == 1.0
    assert coeffs.conv[0] > 0
    np.testing.assert_allclose(
        coeffs.F ** 2 - coeffs.G ** 2, p ** 4 + 2 * p ** 2 * coeffs.conv, rtol=1e-12
    )
    np.testing.assert_allclose(np.tanh(2 * coeffs.tau), -coeffs.G / coeffs.F, rtol=1e-12)
    assert coeffs.tau[0] < 0


def test_coefficients_with_kernel(well):
    p = np.array([2 * np.pi, 4 * np.pi])
    coeffs = renormalized_coefficients(well, 10, np.pi, p)
    np.testing.assert_allclose(coeffs.gamma, np.cosh(np.arcsinh(coeffs.sigma)), rtol=1e-12)
    assert np.all(coeffs.sigma < 0)
    assert np.all(np.abs(coeffs.G) < coeffs.F)
    vectors = [[2 * np.pi, 0, 0], [0, 0, 4 * np.pi]]
    again = renormalized_coefficients(well, 10, np.pi, vectors, workers=2)
    np.testing.assert_allclose(again.F, coeffs.F, rtol=1e-14)


def test_coefficient_preconditions(well):
    with pytest.raises(PreconditionError):
        renormalized_coefficients(well, 10, 0.0, [2 * np.pi])
    with pytest.raises(PreconditionError):
        renormalized_coefficients(well, 10, np.pi, [0.0, 2 * np.pi])


def test_diagonalization_constant(well):
    coeffs = coefficient_shells(well, 20, 4 * np.pi, 2)
    assert coeffs.counts.sum() == 5 ** 3 - 1
    assert diagonalization_constant(coeffs) == pytest.approx(
        coeffs.diagonal_constant(), rel=1e-10
    )
    assert coeffs.diagonal_constant() < 0
    rows = coeffs.rows()
    assert len(rows) == len(coeffs.p)
    assert len(rows[0]) == len(BogoliubovCoefficients.COLUMNS)


def test_plain_bogoliubov_angles(well):
    N = 10
    p = np.array([2 * np.pi, 6 * np.pi])
    tau = bogoliubov_approximation_tau(well, N, p)
    vhat = fourier_transform(well, p / N)
    np.testing.assert_allclose(np.tanh(2 * tau), -vhat / (p * p + vhat), rtol=1e-12)
    assert tau[0] < 0


@pytest.mark.slow
def test_coefficient_pipeline_approaches_dispersion():
    result = check_coefficient_pipeline()
    assert result.passed, result.value


def test_ground_state_energy_structure(well):
    a0 = 0.01
    energy = ground_state_energy_gp(well, 10, e_lambda_method="ewald", a0=a0)
    assert energy.leading == pytest.approx(4 * np.pi * 9 * a0)
    assert energy.e_lambda == pytest.approx(E_LAMBDA, abs=1e-5)
    assert energy.bogoliubov_term > 0
    assert energy.total == pytest.approx(
        energy.leading + energy.e_lambda_term + energy.bogoliubov_term
    )
    assert energy.to_dict()["N"] == 10


def test_ground_state_energy_edge_cases(well):
    zero = ground_state_energy_gp(well, 5, a0=0.0)
    assert zero.total == 0.0
    with pytest.raises(PreconditionError):
        ground_state_energy_gp(well, 1)


def test_coefficient_decay_bounds(well):
    mu = 4 * np.pi
    coeffs = coefficient_shells(well, 20, mu, 3)
    p = coeffs.p
    assert np.all(coeffs.F >= p ** 2 / 2)
    high = p >= mu
    assert high.sum() > 5
    # p^2 eta_p + conv_p / 2 = N lambda_N (f_N 1_ball)^(p), so G_p = O(p^-2)
    assert np.max(np.abs(coeffs.G[high]) * p[high] ** 2) < 500
    assert np.max(np.abs(coeffs.tau[high]) * p[high] ** 4) < 300
