import pytest

from gpbogo.checks import (
    FULL_SUITE,
    NUMERIC_SUITE,
    check_scattering_identity,
    parse_suite,
    reference_potentials,
    run_suite,
)
from gpbogo.utils.errors import PreconditionError


def test_parse_suite():
    assert parse_suite("all") == FULL_SUITE
    assert parse_suite("numbers") == NUMERIC_SUITE
    assert parse_suite("12, 2,2") == (2, 12)


@pytest.mark.parametrize("suite", ["some", "0", "14", ","])
def test_parse_suite_errors(suite):
    with pytest.raises(PreconditionError):
        parse_suite(suite)


def test_reference_potentials():
    pots = reference_potentials()
    assert len(pots) == 5
    assert {p.kind for p in pots.values()} == {"square_well", "smooth_bump", "tabulated"}


def test_scattering_identity_check():
    result = check_scattering_identity()
    assert result.passed
    assert set(result.details) == set(reference_potentials())


def test_run_suite_with_time_limit():
    results = run_suite("1,13", pbar=False)
    assert [r.criterion for r in results] == [1, 13]
    assert all(r.passed for r in results)
    assert results[1].value == pytest.approx(results[0].runtime)
    assert results[0].to_dict()["criterion"] == 1
