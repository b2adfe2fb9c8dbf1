"""Block tessellations, the reflections they induce, and unitarity checks for hop algebras."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import TopologyError, WalkParams, fmt

BLOCK_NORM_TOL = 1e-12


class InvalidTessellation(ValueError):
    pass


class TessellationParseError(ValueError):
    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


@dataclass(frozen=True)
class Block:
    sites: tuple[int, ...]
    coeffs: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))
        if len(self.sites) != len(self.coeffs):
            raise ValueError("sites and coeffs differ in length")
        if not self.sites:
            raise ValueError("empty block")

    @property
    def norm(self) -> float:
        return math.fsum(abs(c) ** 2 for c in self.coeffs)

    def shifted(self, d: int) -> "Block":
        return Block(tuple(s + d for s in self.sites), self.coeffs)


@dataclass(frozen=True)
class Tessellation:
    """One period of blocks; the block set is invariant under translation by ``period``."""

    blocks: tuple[Block, ...]
    period: int

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if self.period <= 0:
            raise ValueError("period must be positive")

    def translates(self, lo: int, hi: int) -> list[Block]:
        """All translated blocks touching sites ``lo..hi``."""
        reach = max(abs(s) for b in self.blocks for s in b.sites) + self.period
        m_lo = (lo - reach) // self.period
        m_hi = (hi + reach) // self.period + 1
        out = []
        for m in range(m_lo, m_hi + 1):
            for b in self.blocks:
                tb = b.shifted(m * self.period)
                if max(tb.sites) >= lo and min(tb.sites) <= hi:
                    out.append(tb)
        return out

    @property
    def span(self) -> int:
        return max(max(b.sites) - min(b.sites) for b in self.blocks)

    def covered(self) -> set[int]:
        """Residues modulo ``period`` that lie in some block."""
        return {s % self.period for b in self.blocks for s in b.sites}


def two_site_tessellations(
    params: WalkParams, swap_second_block: bool = False
) -> tuple[Tessellation, Tessellation]:
    """Even blocks ``{2x, 2x+1}`` and odd blocks ``{2x+1, 2x+2}``.

    The even block is ``(cos a/2, e^{i phi1} sin a/2)``. The odd block is
    ``(cos b/2, e^{i phi2} sin b/2)``, which makes ``U1 U0`` reproduce the stencil in
    :func:`coinless_walk.evolution.step_coinless2`. ``swap_second_block`` gives
    ``(sin b/2, e^{i phi2} cos b/2)`` instead; that is the same walk at ``pi - beta``.
    """
    a, b = params.alpha, params.beta
    t0 = Tessellation(
        (Block((0, 1), (math.cos(a / 2), np.exp(1j * params.phi1) * math.sin(a / 2))),), 2
    )
    c, s = math.cos(b / 2), math.sin(b / 2)
    if swap_second_block:
        c, s = s, c
    t1 = Tessellation((Block((1, 2), (c, np.exp(1j * params.phi2) * s)),), 2)
    return t0, t1


def three_site_tessellations() -> tuple[Tessellation, Tessellation]:
    """Blocks ``{4x-1, 4x, 4x+1}`` and ``{4x+1, 4x+2, 4x+3}`` with uniform weights."""
    w = 1.0 / math.sqrt(3.0)
    t0 = Tessellation((Block((-1, 0, 1), (w, w, w)),), 4)
    t1 = Tessellation((Block((1, 2, 3), (w, w, w)),), 4)
    return t0, t1


@dataclass
class TessellationReport:
    disjoint: bool
    unit_norms: bool
    period: int
    covered: list[int]
    gaps: list[int]
    # Filled only when a partner tessellation is supplied.
    combined_period: int | None = None
    combined_gaps: list[int] | None = None
    overlap: list[int] | None = None
    messages: list[str] = field(default_factory=list)

    @property
    def full_cover(self) -> bool:
        return not self.gaps

    @property
    def combined_cover(self) -> bool | None:
        return None if self.combined_gaps is None else not self.combined_gaps

    @property
    def ok(self) -> bool:
        ok = self.disjoint and self.unit_norms
        if self.combined_gaps is not None:
            ok = ok and not self.combined_gaps
        return ok

    def text(self) -> str:
        lines = [
            f"disjoint: {'pass' if self.disjoint else 'FAIL'}",
            f"unit block norms: {'pass' if self.unit_norms else 'FAIL'}",
            f"period: {self.period}",
            f"covered residues mod {self.period}: {self.covered}",
            f"coverage gaps mod {self.period}: {self.gaps or 'none'}",
        ]
        if self.combined_period is not None:
            lines += [
                f"combined coverage gaps mod {self.combined_period}: {self.combined_gaps or 'none'}",
                f"overlap residues mod {self.combined_period}: {self.overlap}",
            ]
        lines += self.messages
        return "\n".join(lines)


def _site_counts(t: Tessellation, lo: int, hi: int) -> dict[int, int]:
    counts: dict[int, int] = {}
    for b in t.translates(lo, hi):
        for s in b.sites:
            if lo <= s <= hi:
                counts[s] = counts.get(s, 0) + 1
    return counts


def validate_tessellation(t: Tessellation, partner: Tessellation | None = None) -> TessellationReport:
    """Check disjointness, block norms and coverage over one period (periodicity does the rest)."""
    msgs = []
    counts = _site_counts(t, 0, t.period - 1)
    disjoint = all(c == 1 for c in counts.values())
    if not disjoint:
        clash = sorted(s for s, c in counts.items() if c > 1)
        msgs.append(f"overlapping blocks at sites {clash}")
    bad_norm = [b.sites for b in t.blocks if abs(b.norm - 1.0) > BLOCK_NORM_TOL]
    if bad_norm:
        msgs.append(f"blocks without unit norm: {bad_norm}")
    covered = sorted(counts)
    gaps = sorted(set(range(t.period)) - set(covered))
    report = TessellationReport(disjoint, not bad_norm, t.period, covered, gaps, messages=msgs)
    if partner is not None:
        L = math.lcm(t.period, partner.period)
        mine = set(_site_counts(t, 0, L - 1))
        theirs = set(_site_counts(partner, 0, L - 1))
        report.combined_period = L
        report.combined_gaps = sorted(set(range(L)) - (mine | theirs))
        report.overlap = sorted(mine & theirs)
    return report


class ReflectionOperator:
    """``2 sum |u><u| - I`` applied stencil-wise to amplitude arrays.

    Arrays are read as periodic windows of ``n`` sites starting at ``offset``; on the
    line the caller keeps enough zero margin that nothing wraps.
    """

    def __init__(self, tess: Tessellation):
        report = validate_tessellation(tess)
        if not (report.disjoint and report.unit_norms):
            raise InvalidTessellation(report.text())
        self.tess = tess
        self._index_cache: dict[tuple[int, int], list[tuple[np.ndarray, np.ndarray]]] = {}

    def _indices(self, n: int, offset: int):
        p = self.tess.period
        key = (n, offset % p)
        if key not in self._index_cache:
            if n % p:
                raise TopologyError(f"{n} sites is not a multiple of the tessellation period {p}")
            if self.tess.span >= n:
                raise TopologyError("window shorter than a block")
            anchors = p * np.arange(n // p) - offset % p
            groups = []
            for b in self.tess.blocks:
                idx = (np.asarray(b.sites)[None, :] + anchors[:, None]) % n
                groups.append((idx, np.asarray(b.coeffs)))
            self._index_cache[key] = groups
        return self._index_cache[key]

    def apply(self, psi: np.ndarray, offset: int = 0) -> np.ndarray:
        """Apply to the last axis of ``psi``."""
        psi = np.asarray(psi, dtype=complex)
        out = -psi
        for idx, c in self._indices(psi.shape[-1], offset):
            local = psi[..., idx]
            proj = local @ c.conj()
            out[..., idx] = 2.0 * proj[..., None] * c - local
        return out

    def matrix(self, n: int) -> np.ndarray:
        """Dense ``n x n`` operator on a cycle (small-n oracle use only)."""
        return self.apply(np.eye(n, dtype=complex)).T


def reflection_operator(t: Tessellation) -> ReflectionOperator:
    return ReflectionOperator(t)


# -- generalized hop algebra ------------------------------------------------


@dataclass
class GeneralizedHop:
    """Stay operator ``M`` and hop operators ``A_mu``; ``pairing[mu]`` is the reverse direction."""

    M: np.ndarray
    hops: Sequence[np.ndarray]
    pairing: Sequence[int]


@dataclass
class HopResiduals:
    norm: float
    cross: float
    orthogonality: float
    sum_unitarity: float
    tol: float

    @property
    def ok(self) -> bool:
        return max(self.norm, self.cross, self.orthogonality, self.sum_unitarity) < self.tol


def validate_generalized(g: GeneralizedHop, tol: float = 1e-12) -> HopResiduals:
    M = np.atleast_2d(np.asarray(g.M, dtype=complex))
    hops = [np.atleast_2d(np.asarray(a, dtype=complex)) for a in g.hops]
    r = M.shape[0]
    if M.shape != (r, r) or any(a.shape != (r, r) for a in hops):
        raise ValueError("M and all hop matrices must be square with equal rank")
    d = len(hops)
    if sorted(g.pairing) != list(range(d)):
        raise ValueError("pairing must be a permutation of the directions")

    def mx(a):
        return float(np.max(np.abs(a))) if a.size else 0.0

    eye = np.eye(r)
    norm = mx(M.conj().T @ M + sum(a.conj().T @ a for a in hops) - eye)
    cross = max(
        (mx(hops[mu].conj().T @ M + M.conj().T @ hops[g.pairing[mu]]) for mu in range(d)),
        default=0.0,
    )
    orth = max(
        (mx(hops[mu].conj().T @ hops[nu]) for mu in range(d) for nu in range(d) if mu != nu),
        default=0.0,
    )
    total = M + sum(hops)
    sum_unit = mx(total.conj().T @ total - eye)
    return HopResiduals(norm, cross, orth, sum_unit, tol)


# -- text format --------------------------------------------------------------

_ENTRY = re.compile(r"\(\s*(-?\d+)\s*:\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*\)")


def parse_tessellation(text: str) -> Tessellation:
    """Parse ``period: p`` followed by lines ``base: (offset:re,im) ...``."""
    period = None
    blocks = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        head, sep, rest = line.partition(":")
        if not sep:
            raise TessellationParseError(lineno, 1, "expected ':'")
        col0 = len(head) + 2
        key = head.strip()
        if key == "period":
            try:
                period = int(rest.strip())
            except ValueError:
                raise TessellationParseError(lineno, col0, f"bad period {rest.strip()!r}") from None
            if period <= 0:
                raise TessellationParseError(lineno, col0, "period must be positive")
            continue
        if period is None:
            raise TessellationParseError(lineno, 1, "block before 'period:' header")
        try:
            base = int(key)
        except ValueError:
            raise TessellationParseError(lineno, 1, f"bad base site {key!r}") from None
        sites, coeffs = [], []
        pos = 0
        while True:
            while pos < len(rest) and rest[pos].isspace():
                pos += 1
            if pos >= len(rest):
                break
            m = _ENTRY.match(rest, pos)
            if m is None:
                raise TessellationParseError(lineno, col0 + pos, "expected '(offset:re,im)'")
            try:
                c = complex(float(m.group(2)), float(m.group(3)))
            except ValueError:
                raise TessellationParseError(lineno, col0 + m.start(2), "bad number") from None
            sites.append(base + int(m.group(1)))
            coeffs.append(c)
            pos = m.end()
        if not sites:
            raise TessellationParseError(lineno, col0, "block has no entries")
        blocks.append(Block(tuple(sites), tuple(coeffs)))
    if period is None:
        raise TessellationParseError(1, 1, "missing 'period:' header")
    if not blocks:
        raise TessellationParseError(1, 1, "no blocks")
    return Tessellation(tuple(blocks), period)


def format_tessellation(t: Tessellation) -> str:
    lines = [f"period: {t.period}"]
    for b in t.blocks:
        base = b.sites[0]
        entries = " ".join(f"({s - base}:{fmt(c.real)},{fmt(c.imag)})" for s, c in zip(b.sites, b.coeffs))
        lines.append(f"{base}: {entries}")
    return "\n".join(lines) + "\n"
