import numpy as np
import pytest

from gpbogo.cascade import Cascade, overlap_diagnostic
from gpbogo.checks import (
    check_conjugation_invariance,
    check_energy_lowering,
    quadratic_energy_drop,
)
from gpbogo.fockspace import ModeSet
from gpbogo.potential import fourier_transform, square_well
from gpbogo.utils.errors import PreconditionError


@pytest.fixture
def cascade(well, line_modes):
    return Cascade(well, 4, line_modes, mu=4 * np.pi, nu=2 * np.pi)


def test_momentum_sets(cascade):
    assert cascade.high == [3, 4]
    assert cascade.low == [1, 2]


def test_default_cutoffs(well, line_modes):
    cascade = Cascade(well, 4, line_modes)
    assert cascade.mu == pytest.approx(4 * np.pi)
    assert cascade.nu == pytest.approx(2 * np.pi)


def test_run_report(cascade):
    report = cascade.run(pbar=False)
    assert report["dimension"] == 70
    assert [s["name"] for s in report["stages"]] == [
        "excitation",
        "quadratic",
        "cubic",
        "diagonal",
    ]
    assert report["excitation_map_error"] < 1e-12
    assert report["condensate_energy_error"] < 1e-10
    assert report["sector_distance"] == 2
    for stage in report["stages"]:
        assert stage["spectrum_error"] < 1e-9
        assert stage["hermiticity_error"] < 1e-10
        assert stage.get("unitarity_error", 0.0) < 1e-10
    assert report["dropped_terms"]["cubic"] == 2
    for value in report["overlaps"].values():
        assert 0.0 <= value <= 1.0
    assert report["E_exact"] <= report["stages"][0]["vacuum_expectation"]


def test_kernels_follow_cutoff(cascade):
    cascade.build()
    cascade.kernels()
    assert np.all(cascade.eta_high[:3] == 0.0)
    np.testing.assert_allclose(cascade.eta_high[3:], cascade.eta_full[3:])
    assert np.all(cascade.eta_full[1:] < 0)
    assert cascade.tau[0] == 0.0
    assert cascade.eta_full[1] == cascade.eta_full[2]


def test_conjugation_invariance():
    result = check_conjugation_invariance()
    assert result.passed, result.details


def test_quadratic_stage_lowers_energy():
    assert quadratic_energy_drop(4) > 0


@pytest.mark.slow
def test_energy_lowering_for_larger_systems():
    result = check_energy_lowering()
    assert result.passed, result.value


def test_mean_field_cascade(well, three_modes):
    report = Cascade(well, 4, three_modes, beta=0.0).run(pbar=False)
    excitation, quadratic = report["stages"][:2]
    assert quadratic["vacuum_expectation"] == pytest.approx(excitation["vacuum_expectation"])
    assert report["stages"][-1]["spectrum_error"] < 1e-9


def test_cascade_preconditions(well, line_modes):
    with pytest.raises(PreconditionError):
        Cascade(well, 4, line_modes, mu=2 * np.pi, nu=4 * np.pi)
    with pytest.raises(PreconditionError):
        Cascade(well, 4, ModeSet.from_cutoff(0.0))


def test_overlaps_without_interaction(three_modes):
    free = square_well(0.0, 1.0)
    report = Cascade(free, 4, three_modes, beta=0.0).run(pbar=False)
    for value in report["overlaps"].values():
        assert value == pytest.approx(1.0, abs=1e-12)
    assert report["E_exact"] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("N", [4, 6, 8])
def test_mean_field_energy_near_leading_term(well, seven_modes, N):
    kappa = 0.1
    cascade = Cascade(well, N, seven_modes, beta=0.0, kappa=kappa)
    cascade.build()
    leading = kappa * fourier_transform(well, 0.0) * (N - 1) / 2
    p = seven_modes.norms[1:]
    # second-order pair correction at N -> infinity
    pairs = np.sum((kappa * fourier_transform(well, p)) ** 2 / (4 * p ** 2))
    gap = cascade.exact.energy - leading
    assert -1.5 * pairs <= gap <= 1e-12


def test_overlap_diagnostic_matches_report(cascade):
    report = cascade.run(pbar=False)
    overlaps = report["overlaps"]
    value = overlap_diagnostic(cascade.psi, cascade.vacuum, cascade.T)
    assert value == pytest.approx(overlaps["quadratic"])
    assert overlap_diagnostic(cascade.psi, cascade.psi) == pytest.approx(1.0)
    assert overlaps["condensate"] == pytest.approx(abs(np.vdot(cascade.vacuum, cascade.psi)) ** 2)
