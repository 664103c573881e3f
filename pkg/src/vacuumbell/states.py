"""Two-detector density matrix, entanglement measures, and local filtering.

The second-order reduced state of the detector pair is X-shaped in the
basis {up-up, up-down, down-up, down-down}: a vacuum-exchange coherence
-X0 in the outer corners, the emitted-photon overlap EAB in the inner
block, and diagonal weights (nX2, nEA2, nEB2, 1-nEA2-nEB2), normalized
by the trace 1+nX2.

Measures: negativity (sum of negative partial-transpose eigenvalues, in
magnitude), the correlation-matrix criterion M(rho) (sum of the two
largest eigenvalues of T^t T; CHSH violated iff M > 1, maximal CHSH
expectation 2 sqrt(M)), and local filters diag(1, eta) per arm which can
reveal hidden nonlocality at the cost of success probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .amplitudes import AmplitudeSet

__all__ = [
    "TwoQubitState",
    "FilterPair",
    "BellReport",
    "build_state",
    "negativity",
    "negativity_approx",
    "horodecki_M",
    "apply_filter",
    "optimal_filter",
    "chsh_condition",
    "optimal_settings",
    "bell_report",
    "state_from_matrix",
]

_TOL_HERM = 1e-14
_TOL_PSD = 1e-12

_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_PAULI = (_SX, _SY, _SZ)


@dataclass(frozen=True)
class TwoQubitState:
    """Normalized two-qubit density matrix plus its pre-normalization trace."""

    matrix: np.ndarray
    trace_before_normalization: float


@dataclass(frozen=True)
class FilterPair:
    """Local filter strengths diag(1, eta) per arm, eta in (0, 1]."""

    eta_A: float
    eta_B: float

    def __post_init__(self) -> None:
        for name, eta in (("eta_A", self.eta_A), ("eta_B", self.eta_B)):
            if not (0.0 < eta <= 1.0):
                raise ValueError(f"{name} must lie in (0, 1], got {eta!r}")


@dataclass(frozen=True)
class BellReport:
    """All entanglement/Bell figures of one state in a single record."""

    negativity: float
    negativity_approx: float
    M: float
    chsh_max: float
    filter_condition_lhs: float
    filter_condition_rhs: float
    eta_opt: float
    M_filtered: float
    filter_success_prob: float


def state_from_matrix(unnormalized: np.ndarray, tol_psd: float = _TOL_PSD) -> TwoQubitState:
    """Validate and normalize a raw 4x4 density matrix."""
    m = np.asarray(unnormalized, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
    herm = float(np.max(np.abs(m - m.conj().T)))
    scale = max(1.0, float(np.max(np.abs(m))))
    if herm > _TOL_HERM * scale:
        raise ValueError(f"matrix not Hermitian: max |m - m^dag| = {herm!r}")
    tr = float(m.trace().real)
    if not (tr > 0.0 and math.isfinite(tr)):
        raise ValueError(f"trace must be positive and finite, got {tr!r}")
    rho = (m + m.conj().T) / (2.0 * tr)
    eigs = np.linalg.eigvalsh(rho)
    if float(eigs[0]) < -tol_psd:
        raise ValueError(
            f"matrix not positive semidefinite: min eigenvalue {float(eigs[0])!r} "
            f"below -{tol_psd}; reduce the couplings eps0"
        )
    return TwoQubitState(rho, tr)


def build_state(amps: AmplitudeSet, tol_psd: float = _TOL_PSD) -> TwoQubitState:
    """Assemble the X-shaped second-order state from the amplitude set."""
    if not amps.nEA2 + amps.nEB2 < 0.2:
        raise ValueError(
            f"nEA2+nEB2 = {amps.nEA2 + amps.nEB2!r} >= 0.2: outside the perturbative regime"
        )
    x0 = complex(amps.X0)
    eab = complex(amps.EAB)
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = amps.nX2
    m[1, 1] = amps.nEA2
    m[2, 2] = amps.nEB2
    m[3, 3] = 1.0 - amps.nEA2 - amps.nEB2
    m[0, 3] = -x0.conjugate()
    m[3, 0] = -x0
    m[1, 2] = eab
    m[2, 1] = eab.conjugate()
    return state_from_matrix(m, tol_psd=tol_psd)


def _partial_transpose_B(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


_X_OFFDIAG = [(0, 1), (0, 2), (1, 0), (1, 3), (2, 0), (2, 3), (3, 1), (3, 2)]


def _is_x_shaped(rho: np.ndarray) -> bool:
    return all(rho[i, j] == 0.0 for i, j in _X_OFFDIAG)


def _block_eigs(p: float, q: float, z: complex) -> Tuple[float, float]:
    """Eigenvalues of the Hermitian 2x2 [[p, z], [conj(z), q]].

    The smaller eigenvalue comes from det / lambda_max rather than the
    textbook mean - disc form: when |z|^2 is far below ((p - q)/2)^2 the
    subtraction loses the |z|^2 contribution entirely and a barely
    negative eigenvalue rounds to a positive one.  The rationalized form
    keeps full relative accuracy for the small root.
    """
    mean = 0.5 * (p + q)
    disc = math.hypot(0.5 * (p - q), abs(z))
    hi = mean + disc
    if hi == 0.0:
        return 0.0, 0.0
    det = p * q - (z.real * z.real + z.imag * z.imag)
    return det / hi, hi


def negativity(state: TwoQubitState) -> float:
    """Sum of |negative eigenvalues| of the partial transpose over arm B.

    Strictly positive iff the state is entangled (two-qubit case). For
    X-shaped states the partial transpose splits into two 2x2 blocks and
    the eigenvalues are taken from the closed per-block form, which keeps
    full relative accuracy when all block entries are small; general
    states fall back to a dense eigen-decomposition.
    """
    rho = state.matrix
    if _is_x_shaped(rho):
        # PT moves the corner coherence into the inner block and vice versa
        eigs = _block_eigs(rho[1, 1].real, rho[2, 2].real, rho[0, 3]) + _block_eigs(
            rho[0, 0].real, rho[3, 3].real, rho[1, 2]
        )
        return 0.0 + sum(-e for e in eigs if e < 0.0)
    pt = _partial_transpose_B(rho)
    eigs = np.linalg.eigvalsh(pt)
    return 0.0 + float(np.sum(-eigs[eigs < 0.0]))


def negativity_approx(amps: AmplitudeSet) -> float:
    """Leading-order negativity |X0| - sqrt(nEA2*nEB2), clipped at zero."""
    return max(0.0, abs(amps.X0) - math.sqrt(amps.nEA2 * amps.nEB2))


def correlation_matrix(state: TwoQubitState) -> np.ndarray:
    """3x3 matrix T_ij = trace(rho sigma_i x sigma_j), Pauli order x,y,z."""
    rho = state.matrix
    T = np.empty((3, 3))
    for i, si in enumerate(_PAULI):
        for j, sj in enumerate(_PAULI):
            T[i, j] = float(np.trace(rho @ np.kron(si, sj)).real)
    return T


def horodecki_M(state: TwoQubitState) -> float:
    """Sum of the two largest eigenvalues of T^t T; CHSH violated iff > 1."""
    T = correlation_matrix(state)
    eigs = np.linalg.eigvalsh(T.T @ T)
    return float(eigs[-1] + eigs[-2])


def apply_filter(state: TwoQubitState, f: FilterPair) -> Tuple[TwoQubitState, float]:
    """Apply local filters diag(1, eta_A) x diag(1, eta_B); renormalize.

    Returns the filtered state and the success probability (the trace of
    the unnormalized filtered matrix). Raises when the filter annihilates
    the state (success below 1e-300).
    """
    d = np.array([1.0, f.eta_B, f.eta_A, f.eta_A * f.eta_B])
    filtered = state.matrix * np.outer(d, d)
    success = float(filtered.trace().real)
    if success < 1e-300:
        raise ValueError(f"filter annihilates the state: success probability {success!r}")
    return TwoQubitState(filtered / success, success), success


def _symmetric_filter_M(state: TwoQubitState, eta: float) -> float:
    filtered, _ = apply_filter(state, FilterPair(eta, eta))
    return horodecki_M(filtered)


def optimal_filter(state: TwoQubitState) -> Tuple[FilterPair, float]:
    """Maximize M over symmetric filters eta_A = eta_B = eta in (0, 1].

    Coarse 64-point log grid anchored at the state's corner weight
    (the revealing choice is eta^2 ~ |corner coherence|), then golden-
    section refinement of log(eta) to 1e-10. Ties break toward smaller
    eta; the identity filter is always admissible.
    """
    rho00 = float(state.matrix[0, 0].real)
    lo = 1e-6 if rho00 <= 0.0 else min(0.5, max(1e-80, rho00**0.25 * 1e-3))
    grid = np.geomspace(lo, 1.0, 64)
    best_i = 0
    best_m = -math.inf
    for i, eta in enumerate(grid):
        m = _symmetric_filter_M(state, float(eta))
        if m > best_m:
            best_m, best_i = m, i

    a = math.log(grid[max(best_i - 1, 0)])
    b = math.log(grid[min(best_i + 1, len(grid) - 1)])
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = _symmetric_filter_M(state, math.exp(c))
    fd = _symmetric_filter_M(state, math.exp(d))
    while b - a > 1e-10:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = _symmetric_filter_M(state, math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = _symmetric_filter_M(state, math.exp(d))
    eta_ref = min(math.exp(0.5 * (a + b)), 1.0)
    m_ref = _symmetric_filter_M(state, eta_ref)
    if m_ref > best_m or (m_ref == best_m and eta_ref < grid[best_i]):
        return FilterPair(eta_ref, eta_ref), m_ref
    eta = float(grid[best_i])
    return FilterPair(eta, eta), best_m


def chsh_condition(amps: AmplitudeSet) -> Tuple[bool, float, float]:
    """Filtered-violation criterion: |X0|/sqrt(nEA2 nEB2) > 4 sqrt(nX2)/|X0|.

    Returns (holds, lhs, rhs); a vanishing exchange amplitude yields
    (False, lhs, +inf).
    """
    x = abs(amps.X0)
    g = amps.emission_gmean
    lhs = math.inf if (g == 0.0 and x > 0.0) else (x / g if g > 0.0 else 0.0)
    if x == 0.0:
        return False, lhs, math.inf
    rhs = 4.0 * math.sqrt(amps.nX2) / x
    return lhs > rhs, lhs, rhs


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    for comp in v:
        if comp != 0.0:
            return v if comp > 0.0 else -v
    return v


def optimal_settings(
    state: TwoQubitState,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, float]:
    """Measurement axes (a, a', b, b') achieving CHSH expectation 2 sqrt(M).

    Built from the singular system of the correlation matrix: b, b' mix
    the top two right singular vectors with weights (sigma_1, sigma_2),
    a, a' are the matching left singular vectors. Degenerate directions
    fall back to canonical basis completion with a fixed sign convention
    (first nonzero component positive), making the output deterministic.
    """
    T = correlation_matrix(state)
    _, svals, vt = np.linalg.svd(T)
    s1, s2 = float(svals[0]), float(svals[1])
    v1 = _canonical_sign(vt[0])
    v2 = _canonical_sign(vt[1])

    def left_vector(v: np.ndarray, others: list[np.ndarray]) -> np.ndarray:
        # the left vector follows T v (no independent sign flip, so that
        # a . T b terms stay positive); only a vanishing singular value
        # falls back to canonical completion
        w = T @ v
        n = float(np.linalg.norm(w))
        if n > 0.0:
            return w / n
        return _canonical_sign(_basis_completion(others))

    a = left_vector(v1, [])
    ap = left_vector(v2, [a])
    m = s1 * s1 + s2 * s2
    if m > 0.0:
        c, s = s1 / math.sqrt(m), s2 / math.sqrt(m)
    else:
        c, s = 1.0, 0.0
    b = c * v1 + s * v2
    bp = c * v1 - s * v2

    def corr(x: np.ndarray, y: np.ndarray) -> float:
        return float(x @ T @ y)

    chsh = corr(a, b) + corr(a, bp) + corr(ap, b) - corr(ap, bp)
    return a, ap, b, bp, chsh


def _basis_completion(existing: list[np.ndarray]) -> np.ndarray:
    """First canonical basis vector independent of the given ones, normalized."""
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0
        for x in existing:
            e = e - (e @ x) * x
        n = float(np.linalg.norm(e))
        if n > 1e-12:
            return e / n
    raise RuntimeError("no independent direction found")  # unreachable in 3D


def bell_report(amps: AmplitudeSet) -> BellReport:
    """Assemble every entanglement/Bell figure for one amplitude set."""
    state = build_state(amps)
    neg = negativity(state)
    m0 = horodecki_M(state)
    holds, lhs, rhs = chsh_condition(amps)
    fpair, m_f = optimal_filter(state)
    _, success = apply_filter(state, fpair)
    return BellReport(
        negativity=neg,
        negativity_approx=negativity_approx(amps),
        M=m0,
        chsh_max=2.0 * math.sqrt(max(m0, 0.0)),
        filter_condition_lhs=lhs,
        filter_condition_rhs=rhs,
        eta_opt=fpair.eta_A,
        M_filtered=m_f,
        filter_success_prob=success,
    )
