"""Shared fixtures: one quadrature config and cached amplitude sets.

Amplitude computation is the expensive step (adaptive quadrature per
amplitude), so every pair used by more than one test is computed once
per session here.
"""

import warnings

import pytest

from vacuumbell import (
    QuadConfig,
    compute_amplitudes,
    default_pair,
    gap_study_pair,
    gaussian_pair,
)


@pytest.fixture(scope="session")
def quad():
    return QuadConfig()


@pytest.fixture(scope="session")
def default_pair_s(quad):
    return default_pair(quad=quad)


@pytest.fixture(scope="session")
def default_amps(default_pair_s, quad):
    return compute_amplitudes(default_pair_s, quad)


@pytest.fixture(scope="session")
def gaussian_pair_s(quad):
    # this preset sits just inside the light-crossing margin and says so;
    # the warning is its documented behavior, not a test concern
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return gaussian_pair(quad=quad)


@pytest.fixture(scope="session")
def gaussian_amps(gaussian_pair_s, quad):
    return compute_amplitudes(gaussian_pair_s, quad)


@pytest.fixture(scope="session")
def gap16_pair(quad):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return gap_study_pair(16.0, quad=quad)


@pytest.fixture(scope="session")
def gap16_amps(gap16_pair, quad):
    return compute_amplitudes(gap16_pair, quad)


def rel_diff(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale > 0.0 else 0.0
