"""Staggered Fourier analysis of the coinless walks on the infinite line."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import LineState, WalkParams

# Below this, C+- and sin(theta) are treated as vanishing and the limit form is used.
DEGENERACY_TOL = 1e-3


class AccuracyWarning(UserWarning):
    pass


def reduced2_arrays(k, params: WalkParams):
    """``A, B, theta, C+, C-`` on an array of momenta."""
    k = np.asarray(k, dtype=float)
    a, b, p1, p2 = params.as_tuple()
    sa, ca, sb, cb = math.sin(a), math.cos(a), math.sin(b), math.cos(b)
    A = -ca * cb + sa * sb * np.exp(1j * (p1 + p2)) * np.exp(2j * k)
    B = sa * cb * np.exp(1j * p1) * np.exp(1j * k) + ca * sb * np.exp(-1j * p2) * np.exp(-1j * k)
    theta = np.arccos(np.clip(A.real, -1.0, 1.0))
    s = np.sin(theta)
    # sin(theta) (2 sin(theta) +- i(A - A*)) is real: 2 sin(theta)(sin(theta) -+ Im A)
    Cp = (s * (2 * s + 1j * (A - A.conj()))).real
    Cm = (s * (2 * s - 1j * (A - A.conj()))).real
    return A, B, theta, Cp, Cm


@dataclass(frozen=True)
class ReducedPropagator2:
    k: float
    A: complex
    B: complex
    theta: float
    Cplus: float
    Cminus: float

    def matrix(self) -> np.ndarray:
        A, B = self.A, self.B
        return np.array([[A, -B.conjugate()], [B, A.conjugate()]])

    def eigenvectors(self) -> tuple[np.ndarray, np.ndarray]:
        """Normalized eigenvectors for ``e^{+i theta}`` and ``e^{-i theta}``."""
        out = []
        for sign, C in ((1, self.Cplus), (-1, self.Cminus)):
            if C <= DEGENERACY_TOL**2:
                raise ZeroDivisionError(f"C{'+' if sign > 0 else '-'} vanishes at k={self.k}")
            v = np.array([-self.B.conjugate(), np.exp(1j * sign * self.theta) - self.A])
            out.append(v / math.sqrt(C))
        return out[0], out[1]


def reduced2(k: float, params: WalkParams) -> ReducedPropagator2:
    A, B, theta, Cp, Cm = reduced2_arrays(np.array([k]), params)
    return ReducedPropagator2(float(k), complex(A[0]), complex(B[0]), float(theta[0]), float(Cp[0]), float(Cm[0]))


def _angle_eq(a: float, b: float, modulus: float, tol: float = 1e-12) -> bool:
    d = (a - b) % modulus
    return min(d, modulus - d) < tol


def degenerate_k(params: WalkParams, tol: float = 1e-12) -> list[float]:
    """Momenta in ``[-pi, pi]`` where ``C+`` or ``C-`` vanish.

    These are ``alpha = beta`` with ``phi1 + phi2 + 2k = +-pi`` and ``alpha + beta = pi``
    with ``phi1 + phi2 + 2k`` a multiple of ``2 pi``, angles compared modulo ``2 pi``.
    """
    a, b, p1, p2 = params.as_tuple()
    if abs(math.sin(a) * math.cos(b)) < tol and abs(math.cos(a) * math.sin(b)) < tol:
        raise ValueError("B vanishes identically; every momentum is degenerate")
    phase = p1 + p2
    targets = []
    if _angle_eq(a, b, 2 * math.pi, tol):
        targets.append(math.pi)
    if _angle_eq(a + b, math.pi, 2 * math.pi, tol):
        targets.append(0.0)
    ks = set()
    for target in targets:
        # phase + 2k = target (mod 2 pi)  ->  k = (target - phase)/2 (mod pi)
        k0 = ((target - phase) / 2) % math.pi
        for n in range(-2, 3):
            k = k0 + n * math.pi
            if -math.pi - tol <= k <= math.pi + tol:
                ks.add(round(min(max(k, -math.pi), math.pi), 12))
    return sorted(ks)


def _sin_ratio(theta: np.ndarray, t: int) -> np.ndarray:
    """``sin(t theta)/sin(theta)`` with its polynomial limit where ``sin(theta)`` vanishes."""
    s = np.sin(theta)
    out = np.empty_like(theta)
    ok = np.abs(s) > DEGENERACY_TOL
    out[ok] = np.sin(t * theta[ok]) / s[ok]
    if np.any(~ok):
        c = np.cos(theta[~ok])
        # Chebyshev recursion U_{n+1} = 2c U_n - U_{n-1}, with U_{t-1}(cos) = sin(t th)/sin(th)
        prev, cur = np.zeros_like(c), np.ones_like(c)
        if t == 0:
            cur = prev
        for _ in range(t - 1):
            prev, cur = cur, 2 * c * cur - prev
        out[~ok] = cur
    return out


def spectral_integrands(k: np.ndarray, t: int, params: WalkParams) -> tuple[np.ndarray, np.ndarray]:
    """Even- and odd-sublattice integrands for a walker started on ``|0>``.

    Even: ``|B|^2 (e^{i theta t}/C+ + e^{-i theta t}/C-)``; odd: ``B sin(theta t)/sin(theta)``.
    Near degenerate momenta the even integrand is replaced by its limit
    ``A S_t - S_{t-1}`` with ``S_n = sin(n theta)/sin(theta)``.
    """
    A, B, theta, Cp, Cm = reduced2_arrays(k, params)
    if t == 0:
        return np.ones_like(A), np.zeros_like(A)
    St = _sin_ratio(theta, t)
    odd = B * St
    even = np.empty_like(A)
    ok = np.minimum(Cp, Cm) > DEGENERACY_TOL
    B2 = np.abs(B[ok]) ** 2
    even[ok] = B2 * (np.exp(1j * theta[ok] * t) / Cp[ok] + np.exp(-1j * theta[ok] * t) / Cm[ok])
    if np.any(~ok):
        even[~ok] = A[~ok] * St[~ok] - _sin_ratio(theta[~ok], t - 1)
    return even, odd


def quadrature_points(t: int) -> int:
    """Smallest trapezoid size that integrates the time-``t`` integrands exactly."""
    return 4 * t + 4


def spectral_window(t: int, params: WalkParams, M: int | None = None, sites=None) -> LineState | np.ndarray:
    """Amplitudes after ``t`` steps from ``|0>`` by trapezoid quadrature over ``k``.

    With ``sites=None`` returns a ``LineState`` on ``[-2t-2, 2t+3]``; otherwise an array of
    amplitudes at the requested sites.
    """
    if M is None:
        M = quadrature_points(t)
    if M < quadrature_points(t):
        warnings.warn(
            f"M={M} < {quadrature_points(t)}: trapezoid rule is not exact at t={t}",
            AccuracyWarning,
            stacklevel=2,
        )
    k = -math.pi + 2 * math.pi * np.arange(M) / M
    even, odd = spectral_integrands(k, t, params)
    as_state = sites is None
    if as_state:
        sites = np.arange(-2 * t - 2, 2 * t + 4)
    sites = np.asarray(sites)
    integrand = np.where((sites % 2 == 0)[:, None], even[None, :], odd[None, :])
    amps = np.sum(integrand * np.exp(-1j * np.outer(sites, k)), axis=1) / M
    if as_state:
        return LineState(int(sites[0]), amps, t)
    return amps


def wavefunction_spectral(x: int, t: int, params: WalkParams, M: int | None = None) -> complex:
    return complex(spectral_window(t, params, M, sites=[x])[0])


def dispersion(params: WalkParams, n_k: int = 256):
    """Rows ``(k, theta, reA, imA, reB, imB)`` on a uniform grid over ``[-pi, pi)``."""
    k = -math.pi + 2 * math.pi * np.arange(n_k) / n_k
    A, B, theta, _, _ = reduced2_arrays(k, params)
    return [(float(k[i]), float(theta[i]), A[i].real, A[i].imag, B[i].real, B[i].imag) for i in range(n_k)]


def static_flat_band2(params: WalkParams, n_k: int = 256, tol: float = 1e-10) -> bool:
    """Whether eigenvalue 1 is present for every momentum (it needs ``A == 1`` identically)."""
    k = -math.pi + 2 * math.pi * np.arange(n_k) / n_k
    A = reduced2_arrays(k, params)[0]
    return bool(np.all(np.abs(A - 1.0) < tol))


# -- three-site walk ------------------------------------------------------------------


def reduced4_matrix(k):
    """Reduced operator of the three-site walk on ``sum_x e^{-(4x+j)ik} |4x+j>``, j=0..3.

    Column ``j`` is the image of basis vector ``j``. Accepts an array of momenta.
    """
    k = np.asarray(k, dtype=float)
    e = lambda m: np.exp(1j * m * k)  # noqa: E731
    z = np.zeros_like(e(0))
    rows = [
        [3 + z, -6 * e(-1), z, -6 * e(1)],
        [4 * e(-3) - 2 * e(1), 4 * e(-4) + 1, -6 * e(-1), -2 * e(-2) - 2 * e(2)],
        [4 * e(-2) + 4 * e(2), 4 * e(-3) - 2 * e(1), 3 + z, -2 * e(-1) + 4 * e(3)],
        [-2 * e(-1) + 4 * e(3), -2 * e(-2) - 2 * e(2), -6 * e(1), 1 + 4 * e(4)],
    ]
    mat = np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)
    return mat / 9.0


@dataclass(frozen=True)
class ReducedPropagator4:
    k: float
    matrix: np.ndarray

    @property
    def cos_theta(self) -> float:
        return (4 * math.cos(4 * self.k) - 5) / 9

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)

    def flat_projector(self) -> np.ndarray:
        return flat_band_projectors(np.array([self.k]))[0]


def reduced4(k: float) -> ReducedPropagator4:
    return ReducedPropagator4(float(k), reduced4_matrix(k))


def flat_band_projectors(k: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Orthogonal projectors onto the eigenvalue-1 eigenspace, shape ``(len(k), 4, 4)``."""
    mats = reduced4_matrix(k)
    out = np.empty_like(mats)
    for i, R in enumerate(mats):
        w, V = np.linalg.eig(R)
        sel = V[:, np.abs(w - 1.0) < tol]
        Qm, _ = np.linalg.qr(sel)
        out[i] = Qm @ Qm.conj().T
    return out


def _sublattice_transform(amps: np.ndarray, sites: np.ndarray, k: np.ndarray) -> np.ndarray:
    """``a_j(k) = sum_x psi_{4x+j} e^{i(4x+j)k}``, shape ``(len(k), 4)``."""
    out = np.zeros((len(k), 4), dtype=complex)
    phase = np.exp(1j * np.outer(k, sites))
    for j in range(4):
        mask = sites % 4 == j
        out[:, j] = phase[:, mask] @ amps[mask]
    return out


@dataclass(frozen=True)
class FlatBandState:
    """Unnormalized flat-band component of a state on a finite window of sites."""

    offset: int
    amps: np.ndarray
    norm: float

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + len(self.amps))

    def probability(self, site: int) -> float:
        i = site - self.offset
        return float(abs(self.amps[i]) ** 2) if 0 <= i < len(self.amps) else 0.0


def stationary_state(initial: LineState, n_k: int = 2048) -> FlatBandState | None:
    """Projection of ``initial`` onto the flat band, i.e. the part that never moves.

    Evaluated on a periodic window of ``n_k`` sites centred on the initial support,
    which is exact up to the exponentially small tails of the flat-band states.
    Returns ``None`` when the projection vanishes.
    """
    if n_k % 4:
        raise ValueError("n_k must be a multiple of 4")
    sites = initial.sites
    k = -math.pi + 2 * math.pi * np.arange(n_k) / n_k
    a = _sublattice_transform(np.asarray(initial.amps), sites, k)
    b = np.einsum("kij,kj->ki", flat_band_projectors(k), a)
    lo = 4 * ((int(sites[0]) + int(sites[-1])) // 8) - n_k // 2
    out_sites = np.arange(lo, lo + n_k)
    amps = np.empty(n_k, dtype=complex)
    for j in range(4):
        mask = out_sites % 4 == j
        amps[mask] = np.exp(-1j * np.outer(out_sites[mask], k)) @ b[:, j] / n_k
    norm = float(np.sum(np.abs(amps) ** 2))
    if norm == 0.0:
        return None
    return FlatBandState(lo, amps, norm)


def localization_weight(initial: LineState, n_k: int = 2048) -> float:
    """Total probability that stays trapped by the flat band at long times."""
    st = stationary_state(initial, n_k)
    return 0.0 if st is None else min(1.0, st.norm)


def localized_site_probability(initial: LineState, site: int = 0, n_k: int = 2048) -> float:
    """Long-time limit of the flat-band contribution ``|P psi(site)|^2``."""
    st = stationary_state(initial, n_k)
    return 0.0 if st is None else st.probability(site)
