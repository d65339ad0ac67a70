import numpy as np
import pytest

from gpbogo.checks import check_born_convergence, reference_potentials
from gpbogo.potential import fourier_transform, scaled, square_well
from gpbogo.scattering import (
    born_series,
    eta_highpass,
    eta_kernel,
    eta_norm,
    eta_shells,
    eta_table,
    intvf,
    solve_neumann,
    solve_zero_energy,
    vf_transform,
)
from gpbogo.utils.errors import PreconditionError


def test_square_well_scattering_length(well):
    sol = solve_zero_energy(well)
    assert sol.a0 == pytest.approx(1 - np.tanh(1.0), rel=1e-8)
    assert sol.residual < 1e-6


@pytest.mark.parametrize("name", sorted(reference_potentials()))
def test_scattering_length_identity(name):
    sol = solve_zero_energy(reference_potentials()[name])
    assert abs(sol.integral_identity() - sol.a0) < 1e-8


def test_profile_outside_support(potential):
    sol = solve_zero_energy(potential)
    r = np.array([1.5 * potential.R, 3 * potential.R, 50 * potential.R])
    np.testing.assert_allclose(sol.f(r), 1 - sol.a0 / r, rtol=1e-12)
    assert sol.f(2 * potential.R) == pytest.approx(1 - sol.a0 / (2 * potential.R))
    assert sol.du(potential.R) == 1.0
    assert 0 <= sol.f(0.0) <= 1


def test_neumann_profile_outside_support(well):
    sol = solve_neumann(well, 10)
    outside = np.array([0.2, 0.3, 0.5])
    f = sol.f(outside)
    assert f.shape == (3,)
    assert f[-1] == pytest.approx(1.0, abs=1e-9)
    assert sol.f(0.4) == pytest.approx(sol.f(np.array([0.4]))[0])
    assert np.all(np.diff(f) > 0)
    mixed = sol.u(np.array([0.05, 0.3]))
    np.testing.assert_allclose(mixed[1], sol.u(0.3)[0])


def test_profile_is_increasing(well):
    r, f = solve_zero_energy(well).profile()
    assert np.all(np.diff(f) >= -1e-12)
    assert f[-1] < 1


def test_zero_potential():
    sol = solve_zero_energy(square_well(0.0, 1.0))
    assert sol.a0 == 0.0
    assert born_series(square_well(0.0, 1.0)) == [0.0, 0.0]


def test_scaling_covariance(bump):
    """V -> l^-2 V(./l) scales the scattering length by l."""
    a0 = solve_zero_energy(bump).a0
    for length in (0.5, 3.0):
        stretched = scaled(bump, length, length ** -2)
        assert solve_zero_energy(stretched).a0 == pytest.approx(length * a0, rel=1e-8)


def test_born_terms(weak_well):
    a_first, a_second = born_series(weak_well, 1)
    assert a_first == pytest.approx(fourier_transform(weak_well, 0.0) / (8 * np.pi))
    # square well: a0 = V0 R^3/6 - V0^2 R^5/30 + O(V0^3)
    assert a_first == pytest.approx(0.2 / 6, rel=1e-12)
    assert a_second == pytest.approx(-0.04 / 30, rel=1e-6)
    assert born_series(weak_well, 0) == [a_first]


def test_born_cubic_convergence():
    result = check_born_convergence()
    assert result.passed, result


def test_born_order_out_of_range(well):
    with pytest.raises(PreconditionError):
        born_series(well, 2)


def test_neumann_boundary_conditions(well):
    sol = solve_neumann(well, 10)
    value, slope = sol.boundary_residual()
    assert abs(value) < 1e-10
    assert abs(slope) < 1e-6
    assert sol.lambdaN > 0
    assert sol.support == pytest.approx(0.1)
    assert 0 < sol.f(0.05) < 1


def test_neumann_converges_to_scattering_length(well):
    target = 8 * np.pi * solve_zero_energy(well).a0
    gaps = [abs(intvf(solve_neumann(well, N)) - target) for N in (10, 20, 40)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[-1] / target < 0.05


def test_vf_transform_is_continuous_at_zero(well):
    sol = solve_neumann(well, 20)
    assert vf_transform(sol, 1e-3) == pytest.approx(intvf(sol), rel=1e-6)
    assert vf_transform(sol, 5.0) < intvf(sol)


def test_neumann_support_too_large(well):
    with pytest.raises(PreconditionError):
        solve_neumann(well, 2)


def test_eta_kernel(well):
    sol = solve_neumann(well, 10)
    for p in (2 * np.pi, 4 * np.pi):
        eta = eta_kernel(sol, p)
        assert -1 < eta < 0
    expected = eta_kernel(sol, 2 * np.pi)
    assert eta_kernel(sol, [0, 2 * np.pi, 0]) == pytest.approx(expected, rel=1e-12)


def test_eta_shells_and_highpass(well):
    sol = solve_neumann(well, 10)
    m, p, eta, counts = eta_shells(sol, 2)
    assert m[0] == 1 and counts[0] == 6
    assert counts.sum() == 5 ** 3 - 1
    high = eta_highpass(sol, 2 * np.pi * np.sqrt(2), 2)
    assert high[(1, 0, 0)] == 0.0
    assert high[(1, 1, 0)] == pytest.approx(eta[m == 2][0])
    assert high[(-2, 2, 2)] == high[(2, 2, 2)]
    columns, rows = eta_table(sol, 2)
    assert columns == ["p", "count", "eta"] and len(rows) == len(m)


def test_eta_norm_decreases_with_cutoff(well):
    sol = solve_neumann(well, 10)
    norms = [eta_norm(sol, mu, 4) for mu in (2 * np.pi, 4 * np.pi, 8 * np.pi)]
    assert norms[0] > norms[1] > norms[2] > 0
    with pytest.raises(PreconditionError):
        eta_highpass(sol, 0.0, 2)


def test_neumann_eigenvalue_scales_like_inverse_n(well):
    a0 = solve_zero_energy(well).a0
    Ns = np.array([50, 100, 200])
    lam = np.array([solve_neumann(well, N).lambdaN for N in Ns])
    assert np.all(lam > 0)
    assert np.all(np.diff(lam) < 0)
    scaled_lam = Ns * lam
    assert np.ptp(scaled_lam) < 0.05 * scaled_lam.mean()
    # int f_N over the ball tends to its volume pi / 6, and lambda_N int f_N to 4 pi a0 / N
    assert scaled_lam[-1] == pytest.approx(24 * a0, rel=0.1)


def test_eta_decay_bound(well):
    N = 100
    a0 = solve_zero_energy(well).a0
    sol = solve_neumann(well, N)
    _, p, eta, _ = eta_shells(sol, 4)
    bound = np.abs(eta) * p ** 2 * np.exp(p / N)
    assert np.all(np.isfinite(bound))
    assert bound.max() < 32 * np.pi * a0
