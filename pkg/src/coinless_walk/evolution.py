"""Time stepping for the two-site, three-site and coined walks.

One call to a stepper is one full time step ``U = U1 U0``. Array kernels act on the
last axis and treat it as periodic; line states are padded with zeros first so the
wrap never carries amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    NORM_TOLERANCE,
    CycleState,
    LineState,
    NormalizationError,
    State,
    TopologyError,
    WalkParams,
)
from .tessellation import (
    GeneralizedHop,
    ReflectionOperator,
    Tessellation,
    three_site_tessellations,
    validate_generalized,
)

_P = np.array([[1, 0], [0, 0]], dtype=complex)
_Q = np.array([[0, 0], [0, 1]], dtype=complex)

_ALIGN = 4
_MIN_CHUNK = 64


# -- array kernels --------------------------------------------------------------


def coinless2_coefficients(params: WalkParams) -> dict[str, complex]:
    a, b, p1, p2 = params.as_tuple()
    sa, ca, sb, cb = math.sin(a), math.cos(a), math.sin(b), math.cos(b)
    return {
        "ee_left": sa * sb * np.exp(1j * (p1 + p2)),
        "eo_left": -ca * sb * np.exp(1j * p2),
        "ee": -ca * cb,
        "eo": -sa * cb * np.exp(-1j * p1),
        "oe": sa * cb * np.exp(1j * p1),
        "oo": -ca * cb,
        "oe_right": ca * sb * np.exp(-1j * p2),
        "oo_right": sa * sb * np.exp(-1j * (p1 + p2)),
    }


def coinless2_kernel(psi: np.ndarray, params: WalkParams) -> np.ndarray:
    """One step of the two-site walk; ``psi[..., 0]`` must be an even site."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[-1] % 2:
        raise ValueError("need an even number of sites")
    c = coinless2_coefficients(params)
    e = psi[..., 0::2]
    o = psi[..., 1::2]
    e_l = np.roll(e, 1, axis=-1)
    o_l = np.roll(o, 1, axis=-1)
    e_r = np.roll(e, -1, axis=-1)
    o_r = np.roll(o, -1, axis=-1)
    out = np.empty_like(psi)
    out[..., 0::2] = c["ee_left"] * e_l + c["eo_left"] * o_l + c["ee"] * e + c["eo"] * o
    out[..., 1::2] = c["oe"] * e + c["oo"] * o + c["oe_right"] * e_r + c["oo_right"] * o_r
    return out


def reflection_pair_kernel(
    psi: np.ndarray, ops: tuple[ReflectionOperator, ReflectionOperator], offset: int = 0
) -> np.ndarray:
    """``U1 U0`` built from two reflection operators."""
    return ops[1].apply(ops[0].apply(psi, offset), offset)


def coined_kernel(upper: np.ndarray, lower: np.ndarray, coin: np.ndarray, upper_moves: str = "left"):
    if upper_moves == "left":
        s_up, s_low = -1, 1
    elif upper_moves == "right":
        s_up, s_low = 1, -1
    else:
        raise ValueError("upper_moves must be 'left' or 'right'")
    # np.roll(a, 1)[x] == a[x - 1]
    u = np.roll(upper, s_up, axis=-1)
    l = np.roll(lower, s_up, axis=-1)
    new_up = coin[0, 0] * u + coin[0, 1] * l
    u = np.roll(upper, s_low, axis=-1)
    l = np.roll(lower, s_low, axis=-1)
    new_low = coin[1, 0] * u + coin[1, 1] * l
    return new_up, new_low


def blockvec_kernel(pairs: np.ndarray, A: np.ndarray, B: np.ndarray, M: np.ndarray) -> np.ndarray:
    """``P[x] <- A P[x-1] + M P[x] + B P[x+1]`` on pair vectors of shape ``(..., n, 2)``."""
    pairs = np.asarray(pairs, dtype=complex)
    if pairs.ndim < 2 or pairs.shape[-1] != 2:
        raise ValueError(f"expected pair vectors of shape (..., n, 2), got {pairs.shape}")
    left = np.roll(pairs, 1, axis=-2)
    right = np.roll(pairs, -1, axis=-2)
    return left @ A.T + pairs @ M.T + right @ B.T


# -- line windows -------------------------------------------------------------------


def _padded_window(amps: np.ndarray, offset: int, margin: int) -> tuple[np.ndarray, int]:
    """Ensure ``margin`` zero sites at both ends of the last axis, with ``offset`` and
    length divisible by 4. Leading axes (e.g. coin components) are padded together."""
    amps = np.asarray(amps, dtype=complex)
    n = amps.shape[-1]
    if (
        offset % _ALIGN == 0
        and n % _ALIGN == 0
        and n > 2 * margin
        and not np.any(amps[..., :margin])
        and not np.any(amps[..., n - margin :])
    ):
        return amps.copy(), offset
    occupied = np.any(amps.reshape(-1, n) != 0, axis=0)
    nz = np.flatnonzero(occupied)
    if nz.size == 0:
        raise NormalizationError("state is identically zero")
    lo = offset + int(nz[0])
    hi = offset + int(nz[-1])
    chunk = max(_MIN_CHUNK, (hi - lo) // 2)
    new_lo = _ALIGN * ((lo - margin - chunk) // _ALIGN)
    new_len = _ALIGN * -(-(hi + margin + chunk + 1 - new_lo) // _ALIGN)
    out = np.zeros(amps.shape[:-1] + (new_len,), dtype=complex)
    out[..., lo - new_lo : hi - new_lo + 1] = amps[..., lo - offset : hi - offset + 1]
    return out, new_lo


def _apply(state: State, kernel: Callable[[np.ndarray, int], np.ndarray], reach: int, steps: int = 1) -> State:
    if isinstance(state, CycleState):
        psi = np.array(state.amps)
        for _ in range(steps):
            psi = kernel(psi, 0)
        return CycleState(state.n_sites, psi, state.time + steps)
    if isinstance(state, LineState):
        psi, off = _padded_window(state.amps, state.offset, 2 * reach * steps)
        for _ in range(steps):
            psi = kernel(psi, off)
        return LineState(off, psi, state.time + steps)
    raise TypeError(f"unsupported state type {type(state).__name__}")


# -- state-level steppers --------------------------------------------------------------


def step_coinless2(state: State, params: WalkParams, steps: int = 1) -> State:
    """Advance the two-site coinless walk by ``steps`` full steps."""
    if isinstance(state, CycleState) and state.n_sites % 2:
        raise TopologyError("two-site walk needs an even cycle")
    return _apply(state, lambda psi, off: coinless2_kernel(psi, params), reach=2, steps=steps)


_THREE_SITE_OPS: tuple[ReflectionOperator, ReflectionOperator] | None = None


def _three_site_ops() -> tuple[ReflectionOperator, ReflectionOperator]:
    global _THREE_SITE_OPS
    if _THREE_SITE_OPS is None:
        t0, t1 = three_site_tessellations()
        _THREE_SITE_OPS = (ReflectionOperator(t0), ReflectionOperator(t1))
    return _THREE_SITE_OPS


def step_coinless3(
    state: State, tessellations: tuple[Tessellation, Tessellation] | None = None, steps: int = 1
) -> State:
    """Advance a walk built from two reflections (defaults to the three-site blocks)."""
    if tessellations is None:
        ops = _three_site_ops()
    else:
        ops = (ReflectionOperator(tessellations[0]), ReflectionOperator(tessellations[1]))
    period = math.lcm(ops[0].tess.period, ops[1].tess.period)
    if isinstance(state, CycleState) and state.n_sites % period:
        raise TopologyError(f"cycle length {state.n_sites} is not a multiple of {period}")
    reach = max(ops[0].tess.span, 1) + max(ops[1].tess.span, 1)
    return _apply(state, lambda psi, off: reflection_pair_kernel(psi, ops, off), reach=reach, steps=steps)


@dataclass(frozen=True)
class CoinParams:
    rho: float
    theta: float
    varphi: float

    @classmethod
    def rotation(cls, rho: float) -> "CoinParams":
        """Real rotation coin ``[[cos, -sin], [sin, cos]]``."""
        return cls(rho, math.pi, 0.0)

    def matrix(self) -> np.ndarray:
        r, t, f = self.rho, self.theta, self.varphi
        return np.array(
            [
                [math.cos(r), math.sin(r) * np.exp(1j * t)],
                [math.sin(r) * np.exp(1j * f), -math.cos(r) * np.exp(1j * (t + f))],
            ]
        )


@dataclass(frozen=True)
class CoinedState:
    """Two-component amplitudes; ``n_sites`` set means a cycle, otherwise a line window."""

    upper: np.ndarray
    lower: np.ndarray
    offset: int = 0
    time: int = 0
    n_sites: int | None = None

    def __post_init__(self):
        up = np.array(self.upper, dtype=complex)
        low = np.array(self.lower, dtype=complex)
        if up.shape != low.shape or up.ndim != 1:
            raise ValueError("upper and lower must be 1-d arrays of equal length")
        if self.n_sites is not None and len(up) != self.n_sites:
            raise ValueError("component length does not match n_sites")
        if not (np.all(np.isfinite(up)) and np.all(np.isfinite(low))):
            raise ValueError("amplitudes contain NaN or Inf")
        up.setflags(write=False)
        low.setflags(write=False)
        object.__setattr__(self, "upper", up)
        object.__setattr__(self, "lower", low)
        if abs(self.norm() - 1.0) > NORM_TOLERANCE:
            raise NormalizationError(f"coined state norm {self.norm()!r} deviates from 1")

    @classmethod
    def localized(cls, upper: complex = 1.0, lower: complex = 0.0, n_sites: int | None = None) -> "CoinedState":
        n = 1 if n_sites is None else n_sites
        up = np.zeros(n, dtype=complex)
        low = np.zeros(n, dtype=complex)
        up[0], low[0] = upper, lower
        return cls(up, low, 0, 0, n_sites)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(len(self.upper)) + (0 if self.n_sites is not None else self.offset)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.upper) ** 2) + np.sum(np.abs(self.lower) ** 2))

    def pdf(self) -> np.ndarray:
        return np.abs(self.upper) ** 2 + np.abs(self.lower) ** 2


def step_coined(state: CoinedState, coin: CoinParams, upper_moves: str = "left", steps: int = 1) -> CoinedState:
    """Coined walk ``S (C x I)``.

    ``upper_moves='left'`` is the convention
    ``psi0_x <- C00 psi0_{x+1} + C01 psi1_{x+1}``, ``psi1_x <- C10 psi0_{x-1} + C11 psi1_{x-1}``;
    with ``CoinParams.rotation(rho)`` this is the textbook two-state recursion.
    ``'right'`` uses hop matrices ``A = P C`` towards ``x+1`` and ``B = Q C`` towards ``x-1``.
    """
    C = coin.matrix()
    if state.n_sites is not None:
        up, low = np.array(state.upper), np.array(state.lower)
        for _ in range(steps):
            up, low = coined_kernel(up, low, C, upper_moves)
        return CoinedState(up, low, 0, state.time + steps, state.n_sites)
    window, off = _padded_window(np.stack([state.upper, state.lower]), state.offset, 2 * steps)
    up, low = window
    for _ in range(steps):
        up, low = coined_kernel(up, low, C, upper_moves)
    return CoinedState(up, low, off, state.time + steps)


@dataclass(frozen=True)
class BlockHop:
    """Pair-vector hop matrices: ``A`` from the left pair, ``B`` from the right, ``M`` on-site."""

    A: np.ndarray
    B: np.ndarray
    M: np.ndarray

    def generalized(self) -> GeneralizedHop:
        # A moves pairs towards +1, B towards -1; they are each other's reverse.
        return GeneralizedHop(self.M, [self.A, self.B], [1, 0])


@dataclass(frozen=True)
class CoinlessCoinMap:
    hop: BlockHop
    coin: CoinParams
    exact: bool


def coinless_to_coined(params: WalkParams, exact_tol: float = 1e-12) -> CoinlessCoinMap:
    """Pair-vector form of the two-site walk and its coin ``rho = pi/2 - a, theta = pi - phi1,
    varphi = -(phi1 + 2 phi2)``; the pairing is a coined walk exactly when ``cos(beta) = 0``."""
    a, b, p1, p2 = params.as_tuple()
    coin = CoinParams(math.pi / 2 - a, math.pi - p1, -(p1 + 2 * p2))
    C = coin.matrix()
    phase = np.exp(1j * (p1 + p2))
    R = np.array([[0, -np.exp(1j * p2)], [np.exp(-1j * p2), 0]])
    exact = abs(math.cos(b)) < exact_tol
    A = math.sin(b) * phase * (_P @ C)
    B = math.sin(b) * phase * (_Q @ C)
    M = np.zeros((2, 2), dtype=complex) if exact else math.cos(b) * phase * (R @ C)
    return CoinlessCoinMap(BlockHop(A, B, M), coin, exact)


def step_blockvec(state: State, hop: BlockHop, steps: int = 1) -> State:
    """Advance using the pair-vector recursion for ``(psi_2x, psi_2x+1)``."""
    if isinstance(state, CycleState) and state.n_sites % 2:
        raise TopologyError("pairing needs an even cycle")

    def kernel(psi, off):
        if off % 2 or psi.shape[-1] % 2:
            raise ValueError("window is not aligned to (even, odd) pairs")
        pairs = psi.reshape(psi.shape[:-1] + (-1, 2))
        return blockvec_kernel(pairs, hop.A, hop.B, hop.M).reshape(psi.shape)

    return _apply(state, kernel, reach=2, steps=steps)


def validate_blockhop(hop: BlockHop, tol: float = 1e-12):
    return validate_generalized(hop.generalized(), tol)


def evolve(state, step: Callable, steps: int, *args, **kwargs) -> list:
    """Trajectory ``[state, step(state), ...]`` of length ``steps + 1``."""
    out = [state]
    for _ in range(steps):
        state = step(state, *args, **kwargs)
        out.append(state)
    return out


def align_global_phase(reference: np.ndarray, other: np.ndarray) -> np.ndarray:
    """``other`` times the unit phase that best matches ``reference``."""
    overlap = np.vdot(other, reference)
    if abs(overlap) == 0:
        return other
    return other * (overlap / abs(overlap))


def cycle_propagator(n_sites: int, kernel: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Dense one-step matrix on a cycle from a batched kernel (small-N oracle)."""
    return kernel(np.eye(n_sites, dtype=complex)).T
