# pylint: disable=missing-function-docstring, missing-module-docstring
import pytest

from acceptance import CHECKS, _within_se, check_determinism, check_stationary, list_checks, run_acceptance


def test_check_registry():
    assert list(CHECKS) == [
        "edges", "stationary", "tail", "collapse", "isolation", "densification",
        "martingale", "coupling", "spectral", "moment-ratio", "determinism",
    ]
    assert len(list_checks()) == len(CHECKS)
    assert list_checks()[0].startswith("edges: ")


def test_within_se():
    assert _within_se(1.0, 1.3, 0.1)
    assert not _within_se(1.0, 1.5, 0.1)
    assert _within_se(2.0, 2.0, 0.0)
    assert not _within_se(2.0, 2.1, 0.0)


def test_unknown_check_name():
    with pytest.raises(ValueError):
        run_acceptance(1, only=["edges", "bogus"])


def test_coupling_check_passes():
    (result,) = run_acceptance(7, only=["coupling"])
    assert result.passed, result.detail
    assert result.seconds >= 0.0


def test_stationary_check_passes():
    result = check_stationary(7, 1)
    assert result.passed, result.detail


@pytest.mark.parametrize(
    "name, sizes",
    [
        ("edges", {"reps": 1000}),
        ("tail", {}),
        ("collapse", {"seeds": 2}),
        ("isolation", {"paths": 4, "extinction_reps": 5000}),
        ("densification", {}),
        ("martingale", {"reps": 2000}),
        ("spectral", {"seeds": 6}),
        ("moment-ratio", {"reps": 2000}),
    ],
)
def test_reduced_checks_pass(name, sizes):
    result = CHECKS[name].fn(7, 1, **sizes)
    assert result.name == name
    assert result.passed, result.detail


def test_determinism_check_passes():
    result = check_determinism(7, 2)
    assert result.passed, result.detail
