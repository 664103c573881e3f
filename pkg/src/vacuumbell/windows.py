"""Frequency-domain detector switching windows and gap selection.

Three window families share one spec type: a superoscillating Bessel
window whose pass band oscillates like sin(omega L) around a design
center omega_s, a hat function convolved with itself k times (compact
temporal support [-T, T], sinc^k spectrum), and a Gaussian used as an
analytic anchor. Gap selection places detector A's gap at the
superoscillatory threshold and detector B's gap at the small remainder
omega_s - Omega_A.

All evaluation is even in omega (real time-domain windows) and accepts
scalars, numpy arrays, or mpmath floats (the latter for extended-
precision integration).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Tuple, Union

import mpmath as mp
import numpy as np
import scipy.special as sp

from .quadrature import QuadConfig, QuadratureError, integrate_seeded

__all__ = [
    "WindowKind",
    "WindowSpec",
    "SelectedGaps",
    "eval_window",
    "select_gaps",
    "superosc_band",
    "normalize_window",
    "window_sup",
]

Real = Union[float, np.ndarray, mp.mpf]


class WindowKind:
    """Window family names (string enum; these appear in config files)."""

    SUPEROSCILLATING_BESSEL = "superoscillating_bessel"
    CONVOLVED_HAT = "convolved_hat"
    GAUSSIAN = "gaussian"

    ALL = (SUPEROSCILLATING_BESSEL, CONVOLVED_HAT, GAUSSIAN)


@dataclass(frozen=True)
class WindowSpec:
    """Parameters of one switching window.

    Fields not used by a kind are ignored (N, L, q belong to the
    superoscillating kind; k to the convolved hat). Natural units c=hbar=1.
    """

    kind: str
    T: float
    N: float = 1.0
    L: float = 0.0
    q: int = 2
    k: int = 1
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in WindowKind.ALL:
            raise ValueError(f"unknown window kind {self.kind!r}")
        if not (self.T > 0.0 and math.isfinite(self.T)):
            raise ValueError(f"T must be positive and finite, got {self.T!r}")
        if not (self.amplitude > 0.0 and math.isfinite(self.amplitude)):
            raise ValueError(f"amplitude must be positive and finite, got {self.amplitude!r}")
        if self.kind == WindowKind.SUPEROSCILLATING_BESSEL:
            if not self.N >= 1.0:
                raise ValueError(f"superoscillation index N must be >= 1, got {self.N!r}")
            if not self.L > self.T:
                # (L/T)^2 - 1 must be positive inside the Bessel argument
                raise ValueError(f"superoscillating window needs L > T, got L={self.L!r}, T={self.T!r}")
            if not (isinstance(self.q, int) and self.q >= 2):
                raise ValueError(f"envelope order q must be an integer >= 2, got {self.q!r}")
        if self.kind == WindowKind.CONVOLVED_HAT:
            if not (isinstance(self.k, int) and self.k >= 1):
                raise ValueError(f"convolution order k must be an integer >= 1, got {self.k!r}")


@dataclass(frozen=True)
class SelectedGaps:
    """Detector energy gaps tied to the superoscillatory design.

    omega_A sits at the J0/I0 threshold, omega_s at the superoscillation
    center (T*omega_s = N*L/T), omega_B at the remainder. omega_B_approx
    records the small-gap estimate N/(2L) for diagnostics.
    """

    omega_A: float
    omega_B: float
    omega_s: float
    omega_B_approx: float


def _threshold_sq(spec: WindowSpec) -> float:
    """Squared J0/I0 threshold argument N^2 ((L/T)^2 - 1) in (omega*T)^2 units."""
    r = spec.L / spec.T
    return spec.N * spec.N * (r * r - 1.0)


def _eval_array(spec: WindowSpec, om: np.ndarray) -> np.ndarray:
    om = np.abs(om)
    T = spec.T
    if spec.kind == WindowKind.GAUSSIAN:
        return spec.amplitude * np.exp(-(om * T) ** 2 / 4.0)
    if spec.kind == WindowKind.CONVOLVED_HAT:
        # np.sinc(x) = sin(pi x)/(pi x); removable singularity handled there
        return spec.amplitude * np.sinc(om * T / (spec.k * np.pi)) ** spec.k
    a2 = _threshold_sq(spec)
    u = (om * T) ** 2 - a2
    arg = np.sqrt(np.abs(u))
    bess = np.empty_like(arg)
    band = u >= 0.0
    if np.any(band):
        bess[band] = sp.j0(arg[band])
    if np.any(~band):
        bess[~band] = sp.i0(arg[~band])
    f = np.sinc(om * T / (2.0 * spec.q * np.pi)) ** spec.q
    return spec.amplitude * f * bess


def _eval_mp(spec: WindowSpec, om: mp.mpf) -> mp.mpf:
    om = abs(om)
    T = mp.mpf(spec.T)
    if spec.kind == WindowKind.GAUSSIAN:
        return mp.mpf(spec.amplitude) * mp.exp(-((om * T) ** 2) / 4)

    def sincq(x: mp.mpf, p: int) -> mp.mpf:
        if x == 0:
            return mp.mpf(1)
        return (mp.sin(x) / x) ** p

    if spec.kind == WindowKind.CONVOLVED_HAT:
        return mp.mpf(spec.amplitude) * sincq(om * T / spec.k, spec.k)
    a2 = mp.mpf(_threshold_sq(spec))
    u = (om * T) ** 2 - a2
    if u >= 0:
        bess = mp.besselj(0, mp.sqrt(u))
    else:
        bess = mp.besseli(0, mp.sqrt(-u))
    return mp.mpf(spec.amplitude) * sincq(om * T / (2 * spec.q), spec.q) * bess


def eval_window(spec: WindowSpec, omega: Real) -> Real:
    """Evaluate the window's frequency profile at omega (even in omega)."""
    if isinstance(omega, mp.mpf):
        return _eval_mp(spec, omega)
    om = np.asarray(omega, dtype=np.float64)
    out = _eval_array(spec, om)
    if np.ndim(omega) == 0:
        return float(out)
    return out


def window_sup(spec: WindowSpec) -> float:
    """Upper bound on |window| over all omega (envelope peak)."""
    if spec.kind == WindowKind.SUPEROSCILLATING_BESSEL:
        a = math.sqrt(_threshold_sq(spec))
        # I0 peaks at omega=0 where f=1; J0 region is bounded by 1
        return spec.amplitude * max(float(sp.i0(a)), 1.0)
    return spec.amplitude


def select_gaps(N: float, L: float, T: float) -> SelectedGaps:
    """Choose detector gaps for a superoscillating design (N, L, T).

    Raises a hard error for L <= T: the design's threshold frequency is
    undefined there.
    """
    if not (T > 0.0 and L > T):
        raise ValueError(f"gap selection needs L > T > 0, got L={L!r}, T={T!r}")
    if not N >= 1.0:
        raise ValueError(f"superoscillation index N must be >= 1, got {N!r}")
    r = L / T
    omega_A = (N / T) * math.sqrt(r * r - 1.0)
    omega_s = N * L / (T * T)
    omega_B = omega_s - omega_A
    return SelectedGaps(omega_A, omega_B, omega_s, N / (2.0 * L))


def superosc_band(N: float, L: float, T: float) -> Tuple[float, float]:
    """Band [omega_s - sqrt(N)/(2L), omega_s + sqrt(N)/(2L)] where the
    superoscillating window oscillates like sin(omega L)."""
    gaps = select_gaps(N, L, T)
    half = math.sqrt(N) / (2.0 * L)
    return (gaps.omega_s - half, gaps.omega_s + half)


def _hat_norm_sq_unit(T: float, k: int) -> float:
    """Exact int_0^inf (sin(wT/k)/(wT/k))^(2k) dw.

    Uses the closed form int_0^inf sinc(x)^n dx =
    pi / (2^n (n-1)!) * sum_j (-1)^j C(n,j) (n-2j)^(n-1), n = 2k.
    """
    n = 2 * k
    s = 0.0
    for j in range(k + 1):
        s += (-1) ** j * math.comb(n, j) * float(n - 2 * j) ** (n - 1)
    return (k / T) * math.pi / (2.0**n * math.factorial(n - 1)) * s


def _superosc_norm_sq_unit(spec: WindowSpec, quad: QuadConfig) -> tuple[float, float]:
    """Numeric int_0^inf |window/amplitude|^2 for the superoscillating kind.

    Returns (value, error). The integrand is positive: an I0 hump below
    the threshold, then J0 oscillation under the f(omega)^2 envelope.
    The far tail is cut where the envelope bound
    (2q/(omega T))^(2q) integrates to below the tolerance, and the cut
    bound is folded into the error estimate.
    """
    T, q = spec.T, spec.q
    a = math.sqrt(_threshold_sq(spec))
    thr = a / T

    unit = replace(spec, amplitude=1.0)

    def f2(om):
        v = eval_window(unit, om)
        return v * v

    # first pass over the hump gives the scale for the relative tail target
    hump_edges = list(np.linspace(0.0, thr, 9)) if thr > 0 else [0.0, 1.0 / T]
    head = integrate_seeded(f2, hump_edges, quad)
    target = 0.25 * max(quad.abs_tol, quad.rel_tol * abs(head.value))
    p = 2 * q  # tail envelope power of |window|^2
    C = (2.0 * q / T) ** p
    W = (C / ((p - 1) * target)) ** (1.0 / (p - 1))
    W = max(W, thr * 1.5 + 4.0 * math.pi / T, 2.0 * q / T * 1.5)
    tail_bound = C * W ** (1 - p) / (p - 1)

    # half-period panels of the J0 oscillation (argument ~ omega T)
    n_panels = min(4096, max(8, int(math.ceil((W - thr) * T / math.pi))))
    osc_edges = list(np.linspace(thr, W, n_panels + 1))
    body = integrate_seeded(f2, osc_edges, quad)

    value = head.value + body.value
    error = head.error_estimate + body.error_estimate + tail_bound
    if not (head.converged and body.converged):
        raise QuadratureError("window norm integral did not converge")
    return value, error


def norm_sq(spec: WindowSpec, quad: QuadConfig) -> tuple[float, float]:
    """int_0^inf |window(omega)|^2 d omega with an error estimate."""
    amp2 = spec.amplitude * spec.amplitude
    if spec.kind == WindowKind.GAUSSIAN:
        # int_0^inf exp(-w^2 T^2/2) dw = sqrt(pi/2)/T
        return amp2 * math.sqrt(math.pi / 2.0) / spec.T, 0.0
    if spec.kind == WindowKind.CONVOLVED_HAT:
        return amp2 * _hat_norm_sq_unit(spec.T, spec.k), 0.0
    v, e = _superosc_norm_sq_unit(spec, quad)
    return amp2 * v, amp2 * e


def normalize_window(spec: WindowSpec, quad: QuadConfig) -> WindowSpec:
    """Rescale amplitude so int_0^inf |window|^2 d omega = 1 (idempotent)."""
    v, e = norm_sq(spec, quad)
    if not (v > 0.0 and math.isfinite(v)):
        raise QuadratureError(f"window norm integral invalid: {v!r}")
    return replace(spec, amplitude=spec.amplitude / math.sqrt(v))
