"""Mode-lattice cross-validation and brute-force CHSH maximization.

The lattice route shares no quadrature code with the production path, so
agreement here is evidence against a common-mode integration bug.
"""

import dataclasses
import functools
import math

import numpy as np
import pytest

from vacuumbell import (
    QuadConfig,
    compute_amplitudes,
    state_from_matrix,
    horodecki_M,
)
from vacuumbell.oracle import (
    OracleError,
    brute_chsh,
    build_lattice,
    compare_with_quadrature,
    default_omega_max,
    lattice_amplitudes,
)

CFG = QuadConfig()
_AMP_NAMES = ("X0", "nEA2", "nEB2", "EAB", "nX2")


@functools.lru_cache(maxsize=None)
def _lat(pair, omega_max, n):
    return lattice_amplitudes(pair, omega_max, n)


def _max_rel(lat, ref):
    return max(
        abs(getattr(lat, k) - getattr(ref, k)) / abs(getattr(ref, k))
        for k in _AMP_NAMES
    )


class TestPreconditions:
    def test_too_few_modes(self, gaussian_pair_s):
        with pytest.raises(OracleError):
            lattice_amplitudes(gaussian_pair_s, 700.0, 999)

    def test_cutoff_tail_requirement(self, gaussian_pair_s):
        # omega_max = 1 leaves essentially all the smearing weight
        # outside the lattice at R = 0.01
        with pytest.raises(OracleError):
            build_lattice(gaussian_pair_s, 1.0, 2000)

    def test_default_cutoff_scales_with_radius(self, gaussian_pair_s):
        om = default_omega_max(gaussian_pair_s)
        r_min = min(gaussian_pair_s.detA.R, gaussian_pair_s.detB.R)
        assert om == float(math.ceil(7.0 / r_min))
        build_lattice(gaussian_pair_s, om, 2000)  # must be admissible

    def test_brute_grid_floor(self):
        gnd = state_from_matrix(np.diag([0.0, 0.0, 0.0, 1.0]))
        with pytest.raises(ValueError):
            brute_chsh(gnd, 19)


class TestZeroCoupling:
    def test_all_amplitudes_vanish(self, gaussian_pair_s):
        off = dataclasses.replace(
            gaussian_pair_s,
            detA=dataclasses.replace(gaussian_pair_s.detA, eps0=0.0),
            detB=dataclasses.replace(gaussian_pair_s.detB, eps0=0.0),
        )
        lat = lattice_amplitudes(off, default_omega_max(off), 2000)
        assert (lat.X0, lat.nEA2, lat.nEB2, lat.EAB, lat.nX2) == (
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
        )


class TestAgreement:
    def test_gaussian_preset(self, gaussian_pair_s):
        cmp_ = compare_with_quadrature(gaussian_pair_s, CFG, 10_000)
        assert cmp_.max_rel < 2e-5
        assert cmp_.wick_rel <= 1e-8
        assert len(cmp_.entries) == 5
        assert [e[0] for e in cmp_.entries] == list(_AMP_NAMES)

    def test_gaussian_preset_fine(self, gaussian_pair_s, gaussian_amps):
        lat = _lat(gaussian_pair_s, default_omega_max(gaussian_pair_s), 100_000)
        assert _max_rel(lat, gaussian_amps) <= 1e-6

    def test_default_preset(self, default_pair_s, default_amps):
        # the superoscillating window needs a fine lattice; 60k modes
        # brings the midpoint error under 1e-4 on every amplitude, and
        # each factor of ten in accuracy costs a hundredfold in runtime
        lat = _lat(default_pair_s, default_omega_max(default_pair_s), 60_000)
        assert _max_rel(lat, default_amps) < 1e-4


class TestConvergence:
    def test_second_order_in_mode_count(self, gaussian_pair_s, gaussian_amps):
        ns = (1_000, 10_000, 100_000)
        om = default_omega_max(gaussian_pair_s)
        errs = [_max_rel(_lat(gaussian_pair_s, om, n), gaussian_amps) for n in ns]
        slope = np.polyfit(np.log(ns), np.log(errs), 1)[0]
        assert -2.4 < slope < -1.6


class TestRichardsonCertificate:
    def test_coarse_lattice_rejected(self, default_pair_s):
        with pytest.raises(OracleError):
            lattice_amplitudes(
                default_pair_s,
                default_omega_max(default_pair_s),
                2000,
                check_tol=1e-9,
            )

    def test_loose_tolerance_accepted(self, default_pair_s):
        lat = lattice_amplitudes(
            default_pair_s, default_omega_max(default_pair_s), 2000, check_tol=1.0
        )
        assert lat.error_budget > 0.0


class TestBruteChsh:
    def _bell(self):
        v = np.zeros(4)
        v[0] = v[3] = 1.0 / math.sqrt(2.0)
        return state_from_matrix(np.outer(v, v))

    def test_bell_tsirelson(self):
        assert brute_chsh(self._bell(), 20) == pytest.approx(
            2.0 * math.sqrt(2.0), abs=1e-9
        )

    def test_ground(self):
        gnd = state_from_matrix(np.diag([0.0, 0.0, 0.0, 1.0]))
        assert brute_chsh(gnd, 20) == pytest.approx(2.0, abs=1e-12)

    def test_werner(self):
        v = np.zeros(4)
        v[0] = v[3] = 1.0 / math.sqrt(2.0)
        w = state_from_matrix(0.8 * np.outer(v, v) + 0.2 * np.eye(4) / 4.0)
        assert brute_chsh(w, 20) == pytest.approx(2.0 * math.sqrt(1.28), abs=1e-9)

    def test_nested_refinement_bounded_by_closed_form(self):
        # tilted corner phase pushes the optimum off the canonical axes,
        # so the grid value approaches 2 sqrt(M) from below as the
        # nested grid doubles
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0], m[1, 1], m[2, 2], m[3, 3] = 0.35, 0.1, 0.05, 0.5
        m[0, 3] = 0.28 * np.exp(0.6j)
        m[3, 0] = np.conj(m[0, 3])
        m[1, 2] = m[2, 1] = 0.04
        x = state_from_matrix(m)
        cap = 2.0 * math.sqrt(horodecki_M(x))
        v20 = brute_chsh(x, 20)
        v40 = brute_chsh(x, 40)
        assert v20 <= v40 + 1e-12
        assert v40 <= cap + 1e-12
        assert cap - v40 < 2e-3
