"""Brute-force validation paths independent of the adaptive quadrature.

Two oracles live here. The mode lattice discretizes the field on
midpoint frequencies and recomputes every amplitude as a plain sum; the
two-photon norm in particular comes from an explicit symmetrized double
sum over mode pairs rather than from the Wick combination
nEA2*nEB2 + |EAB|^2 + |X0|^2, so the combination itself is among the
claims being tested. The CHSH gridder maximizes the Bell expectation
over measurement axes directly, providing a from-below check of
2 sqrt(M).

Shared by necessity rather than choice: the angular reduction of the
three-dimensional mode sum (the sin(omega L)/(omega L) factor) is the
same mathematics in both paths; independence is claimed for the
quadrature and the Wick combination, not for that reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .amplitudes import AmplitudeSet, PairConfig, compute_amplitudes
from .backend import pair_double_sum
from .quadrature import QuadConfig
from .states import TwoQubitState, correlation_matrix
from .windows import eval_window

__all__ = [
    "OracleError",
    "ModeLattice",
    "build_lattice",
    "lattice_amplitudes",
    "brute_chsh",
    "default_omega_max",
    "OracleComparison",
    "compare_with_quadrature",
]

_MIN_MODES = 1000
_TAIL_REQUIREMENT = 1e-20


class OracleError(Exception):
    """Oracle precondition or convergence-certificate failure."""


@dataclass(frozen=True)
class ModeLattice:
    """Midpoint frequency lattice with per-mode one-photon amplitudes.

    After the angular reduction each radial frequency omega_j carries an
    interference phase phi_j with cos(phi_j) = sinc(omega_j L), split
    between the detectors: detector A couples with exp(+i phi_j / 2),
    detector B with exp(-i phi_j / 2). Physically the mode is a pair of
    angular substates carrying exp(+/- i phi_j / 2) each; the arrays
    store the + branch, the - branch is its elementwise conjugate, and
    the substate pair is normalized so |f_A[j]|^2 already includes both.
    Consequences for sums over the stored arrays:

      sum |f_A|^2            -> nEA2 (likewise f_B -> nEB2)
      Re sum conj(f_A) f_B   -> EAB  (imaginary part cancels between branches)
      Re sum f_A h_B         -> X0

    f_* are creation-branch amplitudes (window argument gap + omega),
    h_* annihilation-branch ones (window argument gap - omega).
    """

    omega_max: float
    n_modes: int
    nodes: np.ndarray
    weight: float
    f_A: np.ndarray
    f_B: np.ndarray
    h_A: np.ndarray
    h_B: np.ndarray

    def __post_init__(self) -> None:
        if self.n_modes < _MIN_MODES:
            raise OracleError(f"n_modes must be >= {_MIN_MODES} for comparison runs, got {self.n_modes}")
        if not (self.weight > 0.0):
            raise OracleError(f"mode weight must be positive, got {self.weight!r}")
        if np.any(np.diff(self.nodes) <= 0.0):
            raise OracleError("mode nodes must be strictly increasing")


def _mode_magnitudes(pair: PairConfig, om: np.ndarray, dw: float):
    """Real sign-carrying per-mode amplitudes (a, b, a_mirror, b_mirror)."""
    A, B = pair.detA, pair.detB
    m = pair.field_mass
    mu = np.ones_like(om) if m == 0.0 else om / np.sqrt(om * om + m * m)
    root = np.sqrt(dw * om * mu)
    sa = A.eps0 * root * np.exp(-((om * A.R) ** 2) / 2.0)
    sb = B.eps0 * root * np.exp(-((om * B.R) ** 2) / 2.0)
    a = sa * eval_window(A.window, A.gap + om)
    b = sb * eval_window(B.window, B.gap + om)
    a_mir = sa * eval_window(A.window, A.gap - om)
    b_mir = sb * eval_window(B.window, B.gap - om)
    return a, b, a_mir, b_mir


def build_lattice(pair: PairConfig, omega_max: float, n_modes: int) -> ModeLattice:
    """Construct the midpoint lattice for the given pair."""
    r_min = min(pair.detA.R, pair.detB.R)
    if not math.exp(-((omega_max * r_min) ** 2)) < _TAIL_REQUIREMENT:
        raise OracleError(
            f"omega_max={omega_max!r} leaves tail weight "
            f"exp(-omega_max^2 R^2) >= {_TAIL_REQUIREMENT} at R={r_min!r}"
        )
    dw = omega_max / n_modes
    om = (np.arange(n_modes, dtype=np.float64) + 0.5) * dw
    a, b, a_mir, b_mir = _mode_magnitudes(pair, om, dw)
    half_phase = np.exp(0.5j * np.arccos(np.clip(np.sinc(om * pair.separation / np.pi), -1.0, 1.0)))
    return ModeLattice(
        omega_max=float(omega_max),
        n_modes=int(n_modes),
        nodes=om,
        weight=float(dw),
        f_A=a * half_phase,
        f_B=b * half_phase.conj(),
        h_A=a_mir * half_phase.conj(),
        h_B=b_mir * half_phase,
    )


def _one_photon_sums(pair: PairConfig, omega_max: float, n: int):
    dw = omega_max / n
    om = (np.arange(n, dtype=np.float64) + 0.5) * dw
    a, b, _, b_mir = _mode_magnitudes(pair, om, dw)
    cphi = np.sinc(om * pair.separation / np.pi)
    x0 = float(np.sum(a * b_mir * cphi))
    eab = float(np.sum(a * b * cphi))
    nea2 = float(np.sum(a * a))
    neb2 = float(np.sum(b * b))
    return x0, nea2, neb2, eab


def lattice_amplitudes(
    pair: PairConfig,
    omega_max: float,
    n_modes: int,
    check_tol: float | None = None,
) -> AmplitudeSet:
    """All five amplitudes from plain midpoint mode sums.

    The two-photon part of the norm is the explicit symmetrized double
    sum over mode pairs (j, l); the vacuum term |X0|^2 is added to it.
    The Wick combination nEA2*nEB2 + |EAB|^2 is never used here. With
    ``check_tol`` set, a Richardson certificate (midpoint sums at n and
    2n, error of the n-run estimated as 4/3 of the difference) is
    required to pass for each one-photon amplitude, else an
    insufficient-resolution error is raised.
    """
    lat = build_lattice(pair, omega_max, n_modes)

    x0 = float(np.sum((lat.f_A * lat.h_B).real))
    eab = float(np.sum((lat.f_A.conj() * lat.f_B).real))
    nea2 = float(np.sum((lat.f_A * lat.f_A.conj()).real))
    neb2 = float(np.sum((lat.f_B * lat.f_B.conj()).real))

    budget = 0.0
    if check_tol is not None:
        fine = _one_photon_sums(pair, omega_max, 2 * n_modes)
        coarse = (x0, nea2, neb2, eab)
        names = ("X0", "nEA2", "nEB2", "EAB")
        for name, cv, fv in zip(names, coarse, fine):
            err = 4.0 / 3.0 * abs(fv - cv)
            budget += err
            scale = max(abs(cv), abs(fv))
            if scale > 0.0 and err > check_tol * scale:
                raise OracleError(
                    f"insufficient n_modes={n_modes}: Richardson certificate for {name} "
                    f"estimates relative error {err / scale:.3e} > {check_tol:.3e}"
                )

    # per-pair terms collapse to real arrays once the +/- substates are
    # summed analytically: u_j = |f_A[j]|^2, v_j = |f_B[j]|^2,
    # p_j = Re(conj(f_A[j]) f_B[j]); a naive product of the stored
    # complex entries would pick up a spurious sin*sin interference term
    u = np.ascontiguousarray((lat.f_A * lat.f_A.conj()).real)
    v = np.ascontiguousarray((lat.f_B * lat.f_B.conj()).real)
    p = np.ascontiguousarray((lat.f_A.conj() * lat.f_B).real)
    nx2 = x0 * x0 + float(pair_double_sum(u, v, p))
    return AmplitudeSet(x0, nea2, neb2, eab, nx2, budget)


def default_omega_max(pair: PairConfig) -> float:
    """Smallest integer cutoff with exp(-omega_max^2 R^2) < 1e-20 on
    both arms (exp(-49) ~ 5e-22 at omega_max R = 7)."""
    return float(math.ceil(7.0 / min(pair.detA.R, pair.detB.R)))


@dataclass(frozen=True)
class OracleComparison:
    """Side-by-side amplitudes from the two independent routes."""

    n_modes: int
    omega_max: float
    entries: tuple  # (name, quadrature_value, lattice_value, rel_diff)
    wick_rel: float  # double-sum norm vs the factorized combination

    @property
    def max_rel(self) -> float:
        return max((e[3] for e in self.entries), default=0.0)


def compare_with_quadrature(
    pair: PairConfig,
    quad: QuadConfig,
    n_modes: int,
    omega_max: float | None = None,
    check_tol: float | None = None,
) -> OracleComparison:
    """Run both routes on one pair and tabulate relative differences."""
    if omega_max is None:
        omega_max = default_omega_max(pair)
    ref = compute_amplitudes(pair, quad)
    lat = lattice_amplitudes(pair, omega_max, n_modes, check_tol=check_tol)
    entries = []
    for name in ("X0", "nEA2", "nEB2", "EAB", "nX2"):
        rv, lv = getattr(ref, name), getattr(lat, name)
        denom = max(abs(rv), abs(lv))
        entries.append((name, rv, lv, abs(lv - rv) / denom if denom > 0.0 else 0.0))
    wick = lat.nEA2 * lat.nEB2 + lat.EAB * lat.EAB + lat.X0 * lat.X0
    wick_rel = abs(lat.nX2 - wick) / abs(lat.nX2) if lat.nX2 != 0.0 else 0.0
    return OracleComparison(
        n_modes=int(n_modes), omega_max=float(omega_max), entries=tuple(entries), wick_rel=wick_rel
    )


def _axis_grid(g: int) -> np.ndarray:
    """Unit vectors on a (g+1) x 2g polar/azimuthal grid; doubling g nests."""
    theta = np.linspace(0.0, math.pi, g + 1)
    phi = np.linspace(0.0, 2.0 * math.pi, 2 * g, endpoint=False)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    st = np.sin(tt)
    return np.stack([st * np.cos(pp), st * np.sin(pp), np.cos(tt)]).reshape(3, -1)


def brute_chsh(state: TwoQubitState, grid_per_angle: int) -> float:
    """Grid-maximized CHSH expectation; a from-below bound on 2 sqrt(M).

    b and b' run over the polar/azimuthal grid; for each pair the
    optimal a, a' are analytic (|T(b+b')| + |T(b-b')|), so only two of
    the four axes are gridded.
    """
    if grid_per_angle < 20:
        raise ValueError(f"grid_per_angle must be >= 20, got {grid_per_angle}")
    T = correlation_matrix(state)
    tb = T @ _axis_grid(grid_per_angle)  # (3, n_b)
    n_b = tb.shape[1]
    best = 0.0
    block = 64
    for start in range(0, n_b, block):
        chunk = tb[:, start : start + block]  # (3, c)
        plus = np.linalg.norm(chunk[:, :, None] + tb[:, None, :], axis=0)
        minus = np.linalg.norm(chunk[:, :, None] - tb[:, None, :], axis=0)
        val = float(np.max(plus + minus))
        if val > best:
            best = val
    return best
