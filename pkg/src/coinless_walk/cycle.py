"""Two-site coinless walk on an even cycle: eigensystem, limiting distribution, mixing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import TopologyError, WalkParams
from .evolution import coinless2_kernel, cycle_propagator
from .spectral import reduced2_arrays

# Eigenphases closer than this are treated as one degenerate level.
PHASE_TOL = 1e-9
# Below this C+- the closed-form eigenvector is replaced by a direct 2x2 solve.
CLOSED_FORM_TOL = 1e-8
DENSE_LIMIT = 64


class InconclusiveError(RuntimeError):
    """The horizon was too short to certify a mixing time."""

    def __init__(self, msg: str, last_tvd: float):
        super().__init__(msg)
        self.last_tvd = last_tvd


def _check_n(n: int) -> int:
    n = int(n)
    if n < 2 or n % 2:
        raise TopologyError(f"cycle needs an even number of sites >= 2, got {n}")
    return n


@dataclass
class CycleSpectrum:
    """Eigensystem of the two-site walk on ``N`` sites.

    Index ``i < N/2`` is the ``e^{+i theta_k}`` branch at momentum ``k = i``, index
    ``N/2 + k`` the ``e^{-i theta_k}`` branch. Eigenvectors are
    ``v[i, x] = coef[i, x % 2] * omega^{-x k}`` with ``omega = e^{2 pi i / N}``.
    """

    N: int
    params: WalkParams
    A: np.ndarray
    B: np.ndarray
    theta: np.ndarray
    Cplus: np.ndarray
    Cminus: np.ndarray
    phases: np.ndarray
    coef: np.ndarray
    direct_k: list[int] = field(default_factory=list)
    analytic_degenerate: bool = False

    @property
    def momenta(self) -> np.ndarray:
        return np.tile(np.arange(self.N // 2), 2)

    @property
    def c(self) -> np.ndarray:
        """``c_i = <0|v_i>``."""
        return self.coef[:, 0].copy()

    def eigvecs(self) -> np.ndarray:
        """Dense ``(N, N)`` array, row ``i`` is ``v_i``; meant for small ``N``."""
        x = np.arange(self.N)
        w = np.exp(-2j * math.pi * np.outer(self.momenta, x) / self.N)
        return self.coef[:, x % 2] * w

    def reconstruct(self) -> np.ndarray:
        V = self.eigvecs()
        return (V.T * np.exp(1j * self.phases)) @ V.conj()

    def groups(self, tol: float = PHASE_TOL) -> list[np.ndarray]:
        return eigenphase_groups(self.phases, tol)


def eigenphase_groups(phases, tol: float = PHASE_TOL) -> list[np.ndarray]:
    """Indices clustered by eigenphase on the circle, chaining neighbours within ``tol``."""
    lam = np.mod(np.asarray(phases, dtype=float), 2 * math.pi)
    order = np.argsort(lam, kind="stable")
    s = lam[order]
    cuts = np.flatnonzero(np.diff(s) > tol) + 1
    groups = [list(g) for g in np.split(order, cuts)]
    if len(groups) > 1 and s[0] + 2 * math.pi - s[-1] <= tol:
        groups[0] = groups.pop() + groups[0]
    return [np.array(sorted(g)) for g in groups]


def _direct_pair(A: complex, B: complex) -> tuple[np.ndarray, np.ndarray]:
    R = np.array([[A, -np.conj(B)], [B, np.conj(A)]])
    w, V = np.linalg.eig(R)
    if abs(w[0] - w[1]) < 1e-12:
        # a normal matrix with a repeated eigenvalue is a multiple of the identity
        w, V = np.array([w[0], w[0]]), np.eye(2, dtype=complex)
    else:
        V = V / np.linalg.norm(V, axis=0)
    lam = np.angle(w)
    if lam[0] < lam[1]:
        lam, V = lam[::-1], V[:, ::-1]
    return lam, V


def cycle_spectrum(N: int, params: WalkParams, tol: float = CLOSED_FORM_TOL) -> CycleSpectrum:
    N = _check_n(N)
    h = N // 2
    k = np.arange(h)
    A, B, theta, Cp, Cm = reduced2_arrays(2 * math.pi * k / N, params)
    phases = np.concatenate([theta, -theta])
    coef = np.empty((N, 2), dtype=complex)
    scale = math.sqrt(2.0 / N)
    direct = []
    for branch, C in ((1, Cp), (-1, Cm)):
        rows = slice(0, h) if branch > 0 else slice(h, N)
        with np.errstate(divide="ignore", invalid="ignore"):
            norm = scale / np.sqrt(C)
            coef[rows, 0] = -B.conj() * norm
            coef[rows, 1] = (np.exp(1j * branch * theta) - A) * norm
    for j in np.flatnonzero(np.minimum(Cp, Cm) < tol):
        lam, V = _direct_pair(A[j], B[j])
        phases[j], phases[h + j] = lam
        coef[j], coef[h + j] = scale * V[:, 0], scale * V[:, 1]
        direct.append(int(j))
    a, b, p1, p2 = params.canonical().as_tuple()
    analytic = N % 4 == 0 and math.isclose(a, b, abs_tol=1e-12) and math.isclose(p1, p2, abs_tol=1e-12)
    return CycleSpectrum(N, params, A, B, theta, Cp, Cm, phases, coef, direct, analytic)


def dense_propagator(N: int, params: WalkParams) -> np.ndarray:
    """``N x N`` matrix of one step, built column by column from the stepping kernel."""
    N = _check_n(N)
    return cycle_propagator(N, lambda psi: coinless2_kernel(psi, params))


def _weights(spec: CycleSpectrum) -> np.ndarray:
    # W[i, x] = c_i^* v_{i,x}: contribution of level i to psi_x(0)
    return spec.c.conj()[:, None] * spec.eigvecs()


def limiting_pdf(N: int, params: WalkParams, spec: CycleSpectrum | None = None, tol: float = PHASE_TOL) -> np.ndarray:
    """``pi_x``: the Cesaro limit of the site distribution, started from site 0."""
    spec = spec or cycle_spectrum(N, params)
    N = spec.N
    x = np.arange(N)
    par = x % 2
    cc = spec.c.conj()
    pi = np.zeros(N)
    singles = []
    for g in spec.groups(tol):
        if len(g) == 1:
            singles.append(g[0])
            continue
        kk = spec.momenta[g]
        amp = (cc[g, None] * spec.coef[g][:, par] * np.exp(-2j * math.pi * np.outer(kk, x) / N)).sum(axis=0)
        pi += np.abs(amp) ** 2
    if singles:
        s = np.array(singles)
        w = np.abs(cc[s, None] * spec.coef[s]) ** 2
        pi += w.sum(axis=0)[par]
    return pi


def limiting_pdf_closed_form(N: int, params: WalkParams) -> np.ndarray:
    """Closed-form sums for even and odd sites.

    The even-site sum needs ``phi1 + phi2 = 0``; the odd-site sum, through its ``B^2`` terms,
    needs ``phi1 = phi2 = 0``. :func:`limiting_pdf` covers every case.
    """
    N = _check_n(N)
    h = N // 2
    k = np.arange(h)
    A, B, theta, Cp, Cm = reduced2_arrays(2 * math.pi * k / N, params)
    keep = k >= 1
    if N % 4 == 0:
        notq = k != N // 4
    else:
        notq = np.ones(h, dtype=bool)
    B2 = np.abs(B) ** 2
    s2 = np.sin(theta) ** 2
    y = np.arange(h)
    with np.errstate(divide="ignore", invalid="ignore"):
        base = np.where(keep, B2**2 * (1 / Cp**2 + 1 / Cm**2), 0.0)
        cross = np.where(keep & notq, 2 * B2**2 / (Cp * Cm), 0.0)
        even = 2 / N**2 + 4 / N**2 * (base.sum() + np.cos(8 * math.pi * np.outer(y, k) / N) @ cross)
        odd0 = 2 / N**2 * np.sum(B2 / s2)
        wgt = np.where(keep & notq, 1 / s2, 0.0)
        ph = np.exp(-2j * math.pi * 2 * np.outer(2 * y + 1, k) / N)
        odd = odd0 + 1 / N**2 * ((ph * (B**2 * wgt)).sum(axis=1) + (ph.conj() * (B.conj() ** 2 * wgt)).sum(axis=1)).real
    out = np.empty(N)
    out[0::2], out[1::2] = even, odd
    return out


def _phase_gap_matrix(spec: CycleSpectrum, tol: float = PHASE_TOL) -> tuple[np.ndarray, np.ndarray]:
    lab = np.empty(spec.N, dtype=int)
    for n, g in enumerate(spec.groups(tol)):
        lab[g] = n
    delta = spec.phases[:, None] - spec.phases[None, :]
    distinct = lab[:, None] != lab[None, :]
    return delta, distinct


def oscillatory_part(spec: CycleSpectrum, t: int) -> np.ndarray:
    """``t (pbar(t) - pi)`` per site from the double sum over distinct eigenphases."""
    if t < 1:
        raise ValueError("t must be at least 1")
    delta, distinct = _phase_gap_matrix(spec)
    with np.errstate(divide="ignore", invalid="ignore"):
        G = np.where(distinct, np.expm1(1j * delta * t) / np.expm1(1j * delta), 0.0)
    W = _weights(spec)
    return np.einsum("ix,ij,jx->x", W, G, W.conj())


def time_averaged_pdf(N: int, params: WalkParams, T: int, method: str = "direct", block: int = 1024) -> np.ndarray:
    """``pbar(T) = (1/T) sum_{t<T} p(t)`` from site 0."""
    N = _check_n(N)
    if T < 1:
        raise ValueError("T must be at least 1")
    if method == "spectral":
        spec = cycle_spectrum(N, params)
        return limiting_pdf(N, params, spec) + oscillatory_part(spec, T).real / T
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    psi = np.zeros(N, dtype=complex)
    psi[0] = 1.0
    if N <= DENSE_LIMIT and T > block:
        # long horizons: one column per step inside a block, then jump by U^block
        U = dense_propagator(N, params)
        cols = np.empty((N, block), dtype=complex)
        v = psi
        for j in range(block):
            cols[:, j] = v
            v = U @ v
        jump = np.linalg.matrix_power(U, block)
        acc = np.zeros(N)
        done = 0
        while done + block <= T:
            acc += np.sum(np.abs(cols) ** 2, axis=1)
            cols = jump @ cols
            done += block
        acc += np.sum(np.abs(cols[:, : T - done]) ** 2, axis=1)
        return acc / T
    acc = np.zeros(N)
    for _ in range(T):
        acc += np.abs(psi) ** 2
        psi = coinless2_kernel(psi, params)
    return acc / T


def tvd(N: int, params: WalkParams, t: int, spec: CycleSpectrum | None = None) -> float:
    """Total variation distance between ``pbar(t)`` and ``pi`` via the eigenphase double sum."""
    spec = spec or cycle_spectrum(N, params)
    return float(np.sum(np.abs(oscillatory_part(spec, t)))) / (2 * t)


def tvd_curve(N: int, params: WalkParams, t_max: int, pi: np.ndarray | None = None) -> np.ndarray:
    """``TVD(t)`` for ``t = 1..t_max`` from a running average of evolved distributions.

    Element ``t - 1`` holds ``TVD(t)``.
    """
    N = _check_n(N)
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    pi = limiting_pdf(N, params) if pi is None else pi
    psi = np.zeros(N, dtype=complex)
    psi[0] = 1.0
    acc = np.zeros(N)
    out = np.empty(t_max)
    for t in range(1, t_max + 1):
        acc += psi.real**2 + psi.imag**2
        psi = coinless2_kernel(psi, params)
        out[t - 1] = 0.5 * np.abs(acc / t - pi).sum()
    return out


@dataclass
class MixingReport:
    N: int
    params: WalkParams
    pi: np.ndarray
    tvd_samples: list[tuple[int, float]]
    tau_epsilon: int
    epsilon: float
    stride: int = 1


def _tau_from_curve(curve: np.ndarray, epsilon: float) -> int:
    above = np.flatnonzero(curve > epsilon)
    return 1 if above.size == 0 else int(above[-1]) + 2


def default_horizon(N: int, epsilon: float) -> int:
    """Horizon that comfortably clears ``epsilon/2`` given ``t TVD / N`` stays near 0.1."""
    return max(64, int(math.ceil(0.25 * N / epsilon)))


def mixing_times(
    N: int, params: WalkParams, epsilons, horizon: int | None = None, keep_every: int = 1
) -> list[MixingReport]:
    """One :class:`MixingReport` per epsilon, all read off a single stride-1 TVD curve.

    ``tau`` is the smallest ``T`` with ``TVD(t) <= epsilon`` for every ``t`` in
    ``[T, horizon]``; the horizon must reach ``TVD < epsilon/2`` for the result to count.
    """
    eps = [float(e) for e in epsilons]
    if not eps or min(eps) <= 0:
        raise ValueError("epsilon must be positive")
    horizon = horizon or default_horizon(N, min(eps))
    pi = limiting_pdf(N, params)
    curve = tvd_curve(N, params, horizon, pi)
    if curve[-1] >= min(eps) / 2:
        raise InconclusiveError(
            f"TVD({horizon}) = {curve[-1]:.6g} is not below epsilon/2 = {min(eps) / 2:.6g}", float(curve[-1])
        )
    ts = np.arange(1, horizon + 1)
    out = []
    for e in eps:
        tau = _tau_from_curve(curve, e)
        keep = (ts % keep_every == 0) | (ts == 1) | (ts == tau)
        samples = [(int(a), float(b)) for a, b in zip(ts[keep], curve[keep])]
        out.append(MixingReport(N, params, pi, samples, tau, e, 1))
    return out


def mixing_time(N: int, params: WalkParams, epsilon: float, horizon: int | None = None, keep_every: int = 1) -> MixingReport:
    return mixing_times(N, params, [epsilon], horizon, keep_every)[0]


def _f_sums(spec: CycleSpectrum, t: int | None) -> float:
    delta, distinct = _phase_gap_matrix(spec)
    with np.errstate(divide="ignore", invalid="ignore"):
        G = np.where(distinct, 1.0 / np.expm1(1j * delta), 0.0)
    if t is not None:
        G = G * np.exp(1j * delta * t)
    W = _weights(spec)
    return float(np.sum(np.abs(np.einsum("ix,ij,jx->x", W, G, W.conj()))))


def nonoscillatory_sum(N: int, params: WalkParams, spec: CycleSpectrum | None = None) -> float:
    """``sum_x |sum_{lambda != lambda'} f_{k,k',x}|`` evaluated directly; small ``N`` only."""
    return _f_sums(spec or cycle_spectrum(N, params), None)


def tvd_upper_bound(N: int, params: WalkParams, t: int, spec: CycleSpectrum | None = None) -> float:
    """Triangle-inequality bound on ``TVD(t)`` splitting off the ``e^{i Delta t}`` part."""
    spec = spec or cycle_spectrum(N, params)
    return (_f_sums(spec, None) + _f_sums(spec, t)) / (2 * t)


def _site_factor(d: np.ndarray, N: int) -> np.ndarray:
    # ((-1)^d - cos(2 pi d/N)) / sin(2 pi d/N) without the 0/0 at even d
    x = math.pi * d / N
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(d % 2 == 0, np.tan(x), -1.0 / np.tan(x))


def _half_cot(s: np.ndarray) -> np.ndarray:
    # (1 + cos s) / sin s = cot(s/2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 1.0 / np.tan(s / 2)


def termf_decomposition(N: int, params: WalkParams) -> tuple[float, float, float]:
    """The three sums bounding ``sum_x |sum f|``; degenerate pairs as for ``phi1 + phi2 = 0``."""
    N = _check_n(N)
    h = N // 2
    k = np.arange(h)
    A, B, theta, Cp, Cm = reduced2_arrays(2 * math.pi * k / N, params)
    B2 = np.abs(B) ** 2
    d = k[:, None] - k[None, :]
    pair = np.outer(B2, B2)
    m1 = (d != 0) & (k[:, None] + k[None, :] != h)
    with np.errstate(divide="ignore", invalid="ignore"):
        site = _site_factor(d, N)
        gm = site * _half_cot(theta[:, None] - theta[None, :])
        gp = site * _half_cot(theta[:, None] + theta[None, :])
        t1 = np.where(m1, pair / np.outer(Cp, Cp) * (1 - gm), 0.0).sum()
        t2 = np.where(d == 0, pair / np.outer(Cp, Cm), pair / np.outer(Cp, Cm) * (1 - gp)).sum()
        t3 = np.sum(B2 * (np.sin(theta) ** 2 - A.imag**2) / (Cp * Cm))
    return 4 / N**2 * float(t1), 4 / N**2 * float(t2), 2 / N * float(t3)
