"""Stationary-phase asymptotics of the two-site walk on the ``alpha + beta = pi`` family.

All densities here are on the rescaled scale ``t * p_x`` as a function of ``v = x/(2t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import WalkParams


class LightConeError(ValueError):
    """Velocity outside the open interval ``(-v0, v0)``."""


def _check_family(params: WalkParams, tol: float = 1e-9) -> float:
    d = (params.alpha + params.beta - math.pi) % (2 * math.pi)
    if min(d, 2 * math.pi - d) > tol:
        raise ValueError("asymptotics are implemented for alpha + beta = pi only")
    return abs(math.sin(params.alpha))


def _check_v(v, v0):
    v = np.asarray(v, dtype=float)
    if not 0.0 < v0 < 1.0:
        raise ValueError("need 0 < v0 < 1")
    if np.any(np.abs(v) >= v0):
        raise LightConeError(f"|v| must be below v0={v0}")
    return v


def dispersion_theta(k, v0):
    """``theta(k) = arccos(1 - 2 v0^2 sin^2 k)`` in ``[0, pi]``."""
    return np.arccos(np.clip(1.0 - 2.0 * v0**2 * np.sin(k) ** 2, -1.0, 1.0))


def phase_function(k, v, v0, branch: int):
    """``H(k) = -2 v k + branch * theta(k)``; stationary at the saddle of that branch."""
    return -2.0 * v * np.asarray(k) + branch * dispersion_theta(k, v0)


@dataclass(frozen=True)
class SaddleData:
    v: float
    v0: float
    k_plus: float
    k_minus: float
    H_plus: float
    H_minus: float
    H2abs: float

    @property
    def phase_curvature(self) -> float:
        """``|d^2/dk^2|`` of :func:`phase_function` at either saddle.

        ``H2abs`` keeps the printed closed form, which is ``|dv/dk| = |theta''|/2``.
        """
        return 2.0 * self.H2abs


def saddle(v: float, v0: float) -> SaddleData:
    """Saddle momenta, phase values and curvature for ``|v| < v0 < 1``.

    ``k+-`` are the stationary points of :func:`phase_function` for branch ``+-1`` on
    ``(0, pi)``; the reported ``H+-`` are ``2 v k+- -+ theta(k+-)``, i.e. minus the phase
    function at its saddle.
    """
    _check_v(v, v0)
    r = math.sqrt((1 - v0**2) / (1 - v**2))
    kp = math.acos(max(-1.0, min(1.0, (v / v0) * r)))
    km = math.acos(max(-1.0, min(1.0, -(v / v0) * r)))
    th = math.acos(max(-1.0, min(1.0, (1 + v**2 - 2 * v0**2) / (1 - v**2))))
    Hp = 2 * v * kp - th
    Hm = 2 * v * km + th
    H2 = (1 - v**2) * math.sqrt((v0**2 - v**2) / (1 - v0**2))
    return SaddleData(v, v0, kp, km, Hp, Hm, H2)


def _odd_amplitude(v, v0):
    return np.sqrt((1 - v0**2) / (v0**2 - v**2)) / math.pi


def asymptotic_pdf(x, t: int, params: WalkParams, branch: int = 1):
    """Oscillatory asymptotic ``t * p`` at site(s) ``x`` after ``t`` steps.

    Odd sites carry ``(1/pi) sqrt((1-v0^2)/(v0^2-v^2)) cos^2(pi/4 + t H)`` and even sites
    the factor ``(1+v)/(1-v)`` on top; the two are averaged as for a site pair.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    v0 = _check_family(params)
    v = _check_v(np.asarray(x, dtype=float) / (2.0 * t), v0)
    H = np.vectorize(lambda u: getattr(saddle(float(u), v0), "H_plus" if branch > 0 else "H_minus"))(v)
    odd = _odd_amplitude(v, v0) * np.cos(math.pi / 4 + t * H) ** 2
    return odd * 0.5 * (1.0 + (1 + v) / (1 - v))


def envelope(v, v0: float, mode: str = "mean"):
    """Phase-free envelope of the rescaled density; ``mode='max'`` keeps ``cos^2 -> 1``."""
    v = _check_v(v, v0)
    factor = {"mean": 0.5, "max": 1.0}[mode]
    odd = factor * _odd_amplitude(v, v0)
    return odd / (1.0 - v)


def envelope_by_parity(v, v0: float, parity: int, mode: str = "mean"):
    v = _check_v(v, v0)
    factor = {"mean": 0.5, "max": 1.0}[mode]
    odd = factor * _odd_amplitude(v, v0)
    return odd if parity % 2 else odd * (1 + v) / (1 - v)


@dataclass
class BinnedComparison:
    centers: np.ndarray
    simulated: np.ndarray
    predicted: np.ndarray
    counts: np.ndarray

    def relative_deviation(self, scale: float = 1.0) -> np.ndarray:
        return np.abs(self.simulated - scale * self.predicted) / (scale * self.predicted)


def binned_comparison(sites, probs, t: int, v0: float, edges) -> BinnedComparison:
    """Bin ``t * p`` over ``v = x/(2t)`` and average the envelope over the same sites."""
    sites = np.asarray(sites)
    v = sites / (2.0 * t)
    edges = np.asarray(edges, dtype=float)
    centers, sim, pred, counts = [], [], [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = (v >= lo) & (v < hi)
        if not np.any(m) or hi > v0 or lo < -v0:
            continue
        centers.append(0.5 * (lo + hi))
        sim.append(float(np.mean(t * np.asarray(probs)[m])))
        env = [envelope_by_parity(u, v0, int(s)) for u, s in zip(v[m], sites[m])]
        pred.append(float(np.mean(env)))
        counts.append(int(m.sum()))
    return BinnedComparison(np.array(centers), np.array(sim), np.array(pred), np.array(counts))


def calibration_constant(cmp: BinnedComparison) -> float:
    """Least-squares scale ``c`` in ``simulated ~ c * predicted``."""
    return float(np.dot(cmp.simulated, cmp.predicted) / np.dot(cmp.predicted, cmp.predicted))


def front_positions(sites, probs, t: int, v0: float, window: float = 0.15) -> tuple[float, float]:
    """Velocities of the largest ``t * p`` on each side within ``window`` of ``+-v0``."""
    v = np.asarray(sites) / (2.0 * t)
    p = np.asarray(probs)
    out = []
    for sign in (-1, 1):
        m = np.abs(v - sign * v0) <= window
        out.append(float(v[m][np.argmax(p[m])]))
    return out[0], out[1]


def rescaled_profile(t: int, params: WalkParams, edges, spread: float = 0.25, initial=None) -> BinnedComparison:
    """Binned ``t * p`` averaged over ``t' in [t(1-spread), t(1+spread)]``.

    Averaging nearby times removes the ``cos^2(pi/4 + t H)`` fringes while keeping the
    profile in ``v``, which is scale invariant to leading order.
    """
    from .core import initial_state, pdf
    from .evolution import step_coinless2

    v0 = _check_family(params)
    lo = max(1, int(round(t * (1 - spread))))
    hi = max(lo, int(round(t * (1 + spread))))
    state = step_coinless2(initial or initial_state(), params, steps=lo)
    runs = []
    for s in range(lo, hi + 1):
        runs.append(binned_comparison(state.sites, pdf(state), s, v0, edges))
        if s < hi:
            state = step_coinless2(state, params)
    return BinnedComparison(
        runs[0].centers,
        np.mean([r.simulated for r in runs], axis=0),
        np.mean([r.predicted for r in runs], axis=0),
        runs[0].counts,
    )


def comparison_rows(state, params: WalkParams, scale: float = 1.0):
    """Rows ``v, rho_sim, rho_asym, rho_env`` for every site strictly inside the light cone."""
    from .core import pdf

    v0 = _check_family(params)
    t = state.time
    if t < 1:
        raise ValueError("state must have evolved at least one step")
    probs = pdf(state)
    rows = []
    for x, p in zip(state.sites, probs):
        v = x / (2.0 * t)
        if abs(v) >= v0:
            continue
        rows.append((float(v), float(t * p), float(scale * asymptotic_pdf(x, t, params)), float(scale * envelope(v, v0))))
    return rows
