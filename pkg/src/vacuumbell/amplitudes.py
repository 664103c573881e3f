"""Second-order detector amplitudes as one-dimensional frequency integrals.

Five matrix elements determine the two-detector reduced state after the
interaction: the vacuum exchange amplitude X0, the single-photon emission
norms nEA2 and nEB2, the emitted-photon overlap EAB, and the two-photon
norm nX2. All are integrals over field frequency omega of window products
against sin(omega L)/L (exchange/overlap) or omega (norms), damped by the
detector smearing factor exp(-omega^2 R^2) and, for a massive field, the
mode-measure ratio mu(omega) = omega / sqrt(omega^2 + m^2).

Accuracy convention: integrals are evaluated with unit-amplitude windows
and the coupling/amplitude prefactors are applied afterwards, so the
absolute tolerance of the quadrature acts on O(1)-scale integrands rather
than on values suppressed by window normalization. Error estimates are
scaled identically and summed into an explicit error budget.

Convention note: each amplitude carries its detectors' coupling factors
eps0 and nothing else; no additional 2*pi or mode-measure constants are
introduced, so every ratio used downstream (entanglement margin, CHSH) is
convention-independent.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Union

import mpmath as mp
import numpy as np

from .quadrature import QuadConfig, QuadResult, integrate_halfline
from .windows import WindowKind, WindowSpec, eval_window, window_sup

__all__ = [
    "AmplitudeError",
    "DetectorConfig",
    "PairConfig",
    "AmplitudeSet",
    "exchange_amplitude",
    "emission_norm",
    "cross_overlap",
    "x_norm_squared",
    "compute_amplitudes",
]

# perturbative-regime guard: ||E||^2 beyond this means eps0 is too large
# for the second-order truncation to be meaningful
_PERTURBATIVE_LIMIT = 0.1


class AmplitudeError(Exception):
    """Amplitude evaluation failed; carries the partial result if any."""

    def __init__(self, message: str, partial: Union[QuadResult, None] = None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class DetectorConfig:
    """One pointlike-but-smeared detector: gap, smearing radius, window, coupling."""

    gap: float
    R: float
    window: WindowSpec
    eps0: float

    def __post_init__(self) -> None:
        if not (self.gap >= 0.0 and math.isfinite(self.gap)):
            raise ValueError(f"gap must be >= 0 and finite, got {self.gap!r}")
        if not (self.R > 0.0 and math.isfinite(self.R)):
            raise ValueError(f"smearing radius R must be positive, got {self.R!r}")
        if not (self.eps0 >= 0.0 and math.isfinite(self.eps0)):
            raise ValueError(f"coupling eps0 must be >= 0 and finite, got {self.eps0!r}")


@dataclass(frozen=True)
class PairConfig:
    """Two detectors at separation L in a field of mass m (natural units)."""

    detA: DetectorConfig
    detB: DetectorConfig
    separation: float
    field_mass: float = 0.0

    def __post_init__(self) -> None:
        L = self.separation
        if not (L > 0.0 and math.isfinite(L)):
            raise ValueError(f"separation must be positive, got {L!r}")
        if not (self.field_mass >= 0.0 and math.isfinite(self.field_mass)):
            raise ValueError(f"field mass must be >= 0, got {self.field_mass!r}")
        tmax = max(self.detA.window.T, self.detB.window.T)
        if not L > tmax:
            # switching must fit inside the light-crossing time
            raise ValueError(
                f"detectors must stay causally disconnected: need L > T, got L={L!r}, T={tmax!r}"
            )
        if L < 3.0 * tmax:
            warnings.warn(
                f"separation L={L!r} is below 3T={3.0 * tmax!r}; the point-detector "
                "approximation degrades when the light-crossing margin is small",
                stacklevel=2,
            )


@dataclass(frozen=True)
class AmplitudeSet:
    """The five second-order matrix elements plus their quadrature budget."""

    X0: float
    nEA2: float
    nEB2: float
    EAB: float
    nX2: float
    error_budget: float

    @property
    def emission_gmean(self) -> float:
        """sqrt(nEA2 * nEB2), the emission-side norm product."""
        return math.sqrt(self.nEA2 * self.nEB2)

    @property
    def exchange_margin(self) -> float:
        """|X0| - sqrt(nEA2 * nEB2); entanglement survives when positive."""
        return abs(self.X0) - self.emission_gmean


def _mu(om, m: float):
    """Mode-measure ratio omega/sqrt(omega^2+m^2); 1 for the massless field."""
    if m == 0.0:
        if isinstance(om, mp.mpf):
            return mp.mpf(1)
        return np.ones_like(np.asarray(om, dtype=np.float64))
    if isinstance(om, mp.mpf):
        return om / mp.sqrt(om * om + mp.mpf(m) ** 2)
    om = np.asarray(om, dtype=np.float64)
    return om / np.sqrt(om * om + m * m)


def _sin(x):
    return mp.sin(x) if isinstance(x, mp.mpf) else np.sin(x)


def _gauss_smear(om, R: float):
    """Smearing damping exp(-omega^2 R^2)."""
    if isinstance(om, mp.mpf):
        return mp.exp(-((om * mp.mpf(R)) ** 2))
    om = np.asarray(om, dtype=np.float64)
    return np.exp(-((om * R) ** 2))


def _pair_R(pair: PairConfig) -> float:
    """Combined smearing width for two-detector integrals.

    Each detector contributes exp(-omega^2 R_i^2 / 2); the product is
    exp(-omega^2 (R_A^2+R_B^2)/2), which reduces to the single printed
    factor exp(-omega^2 R^2) when R_A = R_B.
    """
    ra, rb = pair.detA.R, pair.detB.R
    return math.sqrt(0.5 * (ra * ra + rb * rb))


def _sup_shifted(spec: WindowSpec, base: float) -> float:
    """Upper bound of |window(base + omega)| over omega >= 0."""
    if spec.kind == WindowKind.SUPEROSCILLATING_BESSEL:
        r = spec.L / spec.T
        a = spec.N * math.sqrt(r * r - 1.0)
        bt = abs(base) * spec.T
        if bt >= a:
            return spec.amplitude  # stays in the J0 region, |f J0| <= 1
        import scipy.special as sp

        return spec.amplitude * max(1.0, float(sp.i0(math.sqrt(a * a - bt * bt))))
    return spec.amplitude


def _osc_period(spec: WindowSpec) -> float:
    """Characteristic oscillation period of the window profile in omega."""
    if spec.kind == WindowKind.CONVOLVED_HAT:
        return 2.0 * math.pi * spec.k / spec.T
    if spec.kind == WindowKind.SUPEROSCILLATING_BESSEL:
        return 2.0 * math.pi / spec.T
    return math.inf  # Gaussian: no oscillation


def _two_detector_integral(
    pair: PairConfig, quad: QuadConfig, mirror_B: bool
) -> QuadResult:
    """Unit-amplitude integral shared by exchange (mirror_B) and overlap.

    integrand = (1/L) sin(omega L) mu(omega) exp(-omega^2 Rbar^2)
                * windowA(gapA + omega) * windowB(gapB -/+ omega)
    """
    A, B = pair.detA, pair.detB
    L, m = pair.separation, pair.field_mass
    uA = replace(A.window, amplitude=1.0)
    uB = replace(B.window, amplitude=1.0)
    sB = -1.0 if mirror_B else 1.0
    Rbar = _pair_R(pair)

    def f(om):
        return (
            (_sin(om * L) / L)
            * _mu(om, m)
            * _gauss_smear(om, Rbar)
            * eval_window(uA, A.gap + om)
            * eval_window(uB, B.gap + sB * om)
        )

    hint = min(2.0 * math.pi / L, _osc_period(uA), _osc_period(uB))
    bound = _sup_shifted(uA, A.gap) * window_sup(uB) / L
    return integrate_halfline(f, hint, Rbar, quad, envelope_bound=bound)


def _emission_integral(det: DetectorConfig, m: float, quad: QuadConfig) -> QuadResult:
    """Unit-amplitude integral of omega mu exp(-omega^2 R^2) |window(gap+omega)|^2."""
    u = replace(det.window, amplitude=1.0)

    def f(om):
        w = eval_window(u, det.gap + om)
        return om * _mu(om, m) * _gauss_smear(om, det.R) * w * w

    hint = 0.5 * _osc_period(u)  # |window|^2 oscillates twice as fast
    # the extra omega factor in the integrand belongs to the tail-cut rule
    bound = _sup_shifted(u, det.gap) ** 2
    return integrate_halfline(f, hint, det.R, quad, envelope_bound=bound)


def _require_converged(res: QuadResult, label: str) -> None:
    if not res.converged:
        raise AmplitudeError(
            f"{label} integral did not converge: value={res.value!r}, "
            f"error_estimate={res.error_estimate!r} after {res.subdivisions_used} subdivisions",
            partial=res,
        )


def exchange_amplitude(pair: PairConfig, quad: QuadConfig) -> float:
    """Vacuum exchange amplitude X0 = <0|X_AB> (real for real even windows)."""
    scale = pair.detA.eps0 * pair.detB.eps0 * pair.detA.window.amplitude * pair.detB.window.amplitude
    if scale == 0.0:
        return 0.0
    res = _two_detector_integral(pair, quad, mirror_B=True)
    _require_converged(res, "exchange amplitude")
    return scale * res.value


def emission_norm(det: DetectorConfig, m: float, quad: QuadConfig) -> float:
    """Single-photon emission norm ||E||^2 >= 0 for one detector."""
    scale = (det.eps0 * det.window.amplitude) ** 2
    if scale == 0.0:
        return 0.0
    res = _emission_integral(det, m, quad)
    _require_converged(res, "emission norm")
    return max(0.0, scale * res.value)


def cross_overlap(pair: PairConfig, quad: QuadConfig) -> float:
    """Emitted-photon overlap <E_A|E_B> (real for real even windows)."""
    scale = pair.detA.eps0 * pair.detB.eps0 * pair.detA.window.amplitude * pair.detB.window.amplitude
    if scale == 0.0:
        return 0.0
    res = _two_detector_integral(pair, quad, mirror_B=False)
    _require_converged(res, "cross overlap")
    return scale * res.value


def x_norm_squared(
    X0: float, nEA2: float, nEB2: float, EAB: float, pair: PairConfig = None, quad: QuadConfig = None
) -> float:
    """Two-photon norm ||X_AB||^2 = nEA2*nEB2 + |EAB|^2 + |X0|^2.

    Decomposition of the symmetrized two-photon state norm into
    double-emission, identical-photon-exchange, and vacuum components;
    validated against the explicit mode-pair double sum in the oracle.
    """
    return nEA2 * nEB2 + abs(EAB) ** 2 + abs(X0) ** 2


def compute_amplitudes(pair: PairConfig, quad: QuadConfig) -> AmplitudeSet:
    """Evaluate all five matrix elements with a shared error budget.

    Raises AmplitudeError on non-convergence and ValueError when the
    computed set violates Cauchy-Schwarz beyond the error budget or
    leaves the perturbative regime.
    """
    A, B = pair.detA, pair.detB
    cA = A.eps0 * A.window.amplitude
    cB = B.eps0 * B.window.amplitude

    if cA == 0.0 and cB == 0.0:
        return AmplitudeSet(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    if cA * cB != 0.0:
        rx = _two_detector_integral(pair, quad, mirror_B=True)
        ro = _two_detector_integral(pair, quad, mirror_B=False)
        _require_converged(rx, "exchange amplitude")
        _require_converged(ro, "cross overlap")
        X0 = cA * cB * rx.value
        EAB = cA * cB * ro.value
        err_X0 = abs(cA * cB) * rx.error_estimate
        err_EAB = abs(cA * cB) * ro.error_estimate
    else:
        X0 = EAB = err_X0 = err_EAB = 0.0

    if cA != 0.0:
        ra = _emission_integral(A, pair.field_mass, quad)
        _require_converged(ra, "emission norm (A)")
        nEA2 = max(0.0, cA * cA * ra.value)
        err_EA = cA * cA * ra.error_estimate
    else:
        nEA2 = err_EA = 0.0
    if cB != 0.0:
        rb = _emission_integral(B, pair.field_mass, quad)
        _require_converged(rb, "emission norm (B)")
        nEB2 = max(0.0, cB * cB * rb.value)
        err_EB = cB * cB * rb.error_estimate
    else:
        nEB2 = err_EB = 0.0

    nX2 = x_norm_squared(X0, nEA2, nEB2, EAB)
    err_nX2 = nEB2 * err_EA + nEA2 * err_EB + 2.0 * abs(EAB) * err_EAB + 2.0 * abs(X0) * err_X0
    budget = err_X0 + err_EA + err_EB + err_EAB + err_nX2

    # Cauchy-Schwarz to within the propagated quadrature slack
    slack = err_EAB * (2.0 * abs(EAB) + err_EAB) + nEB2 * err_EA + nEA2 * err_EB + err_EA * err_EB
    if EAB * EAB > nEA2 * nEB2 + slack + 1e-300:
        raise ValueError(
            f"Cauchy-Schwarz violated beyond error budget: |EAB|^2={EAB * EAB!r} "
            f"> nEA2*nEB2={nEA2 * nEB2!r} + slack={slack!r}; quadrature misconfigured"
        )
    for name, val in (("nEA2", nEA2), ("nEB2", nEB2)):
        if val >= _PERTURBATIVE_LIMIT:
            raise ValueError(
                f"{name}={val!r} >= {_PERTURBATIVE_LIMIT}: couplings leave the perturbative regime"
            )

    return AmplitudeSet(X0, nEA2, nEB2, EAB, nX2, budget)
