"""State containers for walks on the line and on even cycles."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

TWO_PI = 2.0 * math.pi

# |norm - 1| above this is treated as a caller error rather than roundoff.
NORM_TOLERANCE = 1e-6


class NormalizationError(ValueError):
    pass


class TopologyError(ValueError):
    pass


def _frozen_array(values, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    if arr.ndim != 1:
        raise ValueError("amplitudes must be one-dimensional")
    arr.setflags(write=False)
    return arr


def _check_amplitudes(amps: np.ndarray) -> None:
    if not np.all(np.isfinite(amps)):
        raise ValueError("amplitudes contain NaN or Inf")
    norm = float(np.sum(np.abs(amps) ** 2))
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise NormalizationError(f"state norm {norm!r} deviates from 1")


@dataclass(frozen=True)
class WalkParams:
    """Angles of the two-site block family.

    ``alpha`` sets the even block ``cos(a/2)|2x> + e^{i phi1} sin(a/2)|2x+1>``,
    ``beta`` the odd block; both phases default to zero.
    """

    alpha: float
    beta: float
    phi1: float = 0.0
    phi2: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "phi1", "phi2"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)

    @classmethod
    def from_velocity(cls, v0: float, phi1: float = 0.0, phi2: float = 0.0) -> "WalkParams":
        """The alpha + beta = pi family with light-cone speed ``v0 = sin(alpha)``."""
        if not 0.0 <= v0 <= 1.0:
            raise ValueError("v0 must lie in [0, 1]")
        alpha = math.asin(v0)
        return cls(alpha, math.pi - alpha, phi1, phi2)

    def canonical(self) -> "WalkParams":
        return WalkParams(*(a % TWO_PI for a in self.as_tuple()))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.phi1, self.phi2)


@dataclass(frozen=True)
class LineState:
    """Amplitudes on the infinite line, stored on the window ``[offset, offset+len)``.

    Sites outside the window carry zero amplitude.
    """

    offset: int
    amps: np.ndarray
    time: int = 0

    def __post_init__(self):
        object.__setattr__(self, "offset", int(self.offset))
        object.__setattr__(self, "amps", _frozen_array(self.amps))
        if self.time < 0:
            raise ValueError("time must be non-negative")
        _check_amplitudes(self.amps)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + len(self.amps))

    @property
    def parity(self) -> int:
        return self.offset % 2

    def amplitude(self, site: int) -> complex:
        i = site - self.offset
        if 0 <= i < len(self.amps):
            return complex(self.amps[i])
        return 0j

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def support(self, tol: float = 0.0) -> tuple[int, int]:
        """Smallest and largest site with ``|amp| > tol``."""
        nz = np.flatnonzero(np.abs(self.amps) > tol)
        if nz.size == 0:
            raise ValueError("state has empty support")
        return self.offset + int(nz[0]), self.offset + int(nz[-1])

    def trimmed(self, tol: float = 0.0) -> "LineState":
        lo, hi = self.support(tol)
        return LineState(lo, self.amps[lo - self.offset : hi - self.offset + 1], self.time)

    def on_window(self, lo: int, hi: int) -> np.ndarray:
        """Amplitudes on sites ``lo..hi`` inclusive, zero-filled."""
        out = np.zeros(hi - lo + 1, dtype=complex)
        a = max(lo, self.offset)
        b = min(hi, self.offset + len(self.amps) - 1)
        if a <= b:
            out[a - lo : b - lo + 1] = self.amps[a - self.offset : b - self.offset + 1]
        return out


@dataclass(frozen=True)
class CycleState:
    n_sites: int
    amps: np.ndarray
    time: int = 0

    def __post_init__(self):
        n = int(self.n_sites)
        if n <= 0 or n % 2:
            raise TopologyError(f"cycle needs an even positive number of sites, got {n}")
        object.__setattr__(self, "n_sites", n)
        object.__setattr__(self, "amps", _frozen_array(self.amps))
        if len(self.amps) != n:
            raise ValueError("amplitude count does not match n_sites")
        if self.time < 0:
            raise ValueError("time must be non-negative")
        _check_amplitudes(self.amps)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.n_sites)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))


State = Union[LineState, CycleState]


def pdf(state: State) -> np.ndarray:
    """Site probabilities ``|psi_x|^2`` over the stored sites."""
    probs = np.abs(state.amps) ** 2
    total = probs.sum()
    if abs(total - 1.0) > NORM_TOLERANCE:
        raise NormalizationError(f"state norm {total!r} deviates from 1")
    return probs


def initial_state(kind: str = "delta_origin", topology: str = "line", n_sites: int | None = None) -> State:
    """``delta_origin`` is ``|0>``; ``symmetric`` is ``(|0> + i|1>)/sqrt(2)``."""
    if kind in ("delta_origin", "delta"):
        local = np.array([1.0 + 0j])
    elif kind == "symmetric":
        local = np.array([1.0, 1j]) / math.sqrt(2.0)
    else:
        raise ValueError(f"unknown initial condition {kind!r}")
    if topology == "line":
        return LineState(0, local)
    if topology == "cycle":
        if n_sites is None:
            raise TopologyError("cycle topology needs n_sites")
        amps = np.zeros(n_sites, dtype=complex)
        amps[: len(local)] = local
        return CycleState(n_sites, amps)
    raise ValueError(f"unknown topology {topology!r}")


def fmt(x: float) -> str:
    # repr gives the shortest string that round-trips the double.
    return repr(float(x))


def state_to_csv(state: State) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["site", "re", "im", "prob"])
    for site, a in zip(state.sites, state.amps):
        w.writerow([int(site), fmt(a.real), fmt(a.imag), fmt(abs(a) ** 2)])
    return buf.getvalue()


def state_from_csv(text: str, n_sites: int | None = None) -> State:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise ValueError("no rows")
    sites = [int(r["site"]) for r in rows]
    amps = [complex(float(r["re"]), float(r["im"])) for r in rows]
    if n_sites is not None:
        out = np.zeros(n_sites, dtype=complex)
        out[sites] = amps
        return CycleState(n_sites, out)
    if sites != list(range(sites[0], sites[0] + len(sites))):
        raise ValueError("line CSV must list consecutive sites")
    return LineState(sites[0], amps)


def write_rows(path, header: Iterable[str], rows: Iterable[Iterable]) -> None:
    """Write CSV atomically: temp file in the target directory, then rename."""
    import os
    import tempfile

    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(list(header))
            for row in rows:
                w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
