"""Command-line front end: ``python3 -m coinless_walk <command> [--config FILE] [--key value ...]``."""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import asymptotics, cycle, spectral
from .core import NormalizationError, TopologyError, WalkParams, initial_state, pdf, write_rows
from .evolution import CoinedState, CoinParams, step_coined, step_coinless2, step_coinless3
from .tessellation import (
    TessellationParseError,
    parse_tessellation,
    three_site_tessellations,
    two_site_tessellations,
    validate_tessellation,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
THREADS_ENV = "COINLESS_WALK_THREADS"

WALKS = ("two_site", "three_site", "coined")
TOPOLOGIES = ("line", "cycle")
INITIALS = ("delta", "symmetric")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


_PI_LITERAL = re.compile(r"^([+-]?)(\d+(?:\.\d*)?)?\s*\*?\s*pi(?:\s*/\s*(\d+(?:\.\d*)?))?$")


def parse_angle(text: str) -> float:
    """Decimal radians or a rational multiple of pi such as ``pi/2``, ``-3pi/4``, ``2*pi/3``."""
    s = text.strip().lower()
    m = _PI_LITERAL.match(s)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        num = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(3)) if m.group(3) else 1.0
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return sign * num * math.pi / den
    value = float(s)
    if not math.isfinite(value):
        raise ValueError(f"angle {text!r} is not finite")
    return value


# value kind per config key; drives parsing, emission and the flag set
_KINDS = {
    "walk": "str", "topology": "str", "N": "int",
    "v0": "float", "alpha": "angle", "beta": "angle", "phi1": "angle", "phi2": "angle",
    "rho": "angle", "theta": "angle", "varphi": "angle", "upper_moves": "str",
    "steps": "int", "initial": "str", "output": "str", "method": "str",
    "epsilon": "floats", "horizon": "int", "M": "int", "n_k": "int", "v_bins": "int",
    "sizes": "ints", "termf_sizes": "ints", "tmax_over_n": "float", "tessellation": "str",
}


@dataclass(frozen=True)
class RunConfig:
    walk: str = "two_site"
    topology: str = "line"
    N: int | None = None
    v0: float | None = None
    alpha: float | None = None
    beta: float | None = None
    phi1: float | None = None
    phi2: float | None = None
    rho: float | None = None
    theta: float | None = None
    varphi: float | None = None
    upper_moves: str = "left"
    steps: int = 0
    initial: str = "delta"
    output: str | None = None
    method: str = "direct"
    epsilon: tuple[float, ...] = ()
    horizon: int | None = None
    M: int | None = None
    n_k: int = 256
    v_bins: int | None = None
    sizes: tuple[int, ...] = ()
    termf_sizes: tuple[int, ...] = ()
    tmax_over_n: float = 1.0
    tessellation: str | None = None

    def walk_params(self) -> WalkParams:
        if self.v0 is not None:
            return WalkParams.from_velocity(self.v0, self.phi1 or 0.0, self.phi2 or 0.0)
        return WalkParams(self.alpha, self.beta, self.phi1 or 0.0, self.phi2 or 0.0)

    def coin_params(self) -> CoinParams:
        theta = math.pi if self.theta is None else self.theta
        return CoinParams(self.rho, theta, self.varphi or 0.0)


def _parse_value(key: str, text: str):
    kind = _KINDS[key]
    text = text.strip()
    try:
        if kind == "str":
            return text
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "angle":
            return parse_angle(text)
        if kind == "ints":
            return tuple(int(v) for v in text.split(",") if v.strip())
        if kind == "floats":
            return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(key, f"cannot parse {text!r} ({exc})") from None
    raise AssertionError(kind)


def _emit_value(value) -> str:
    if isinstance(value, tuple):
        return ",".join(_emit_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(text: str) -> dict:
    """``key=value`` lines, ``#`` comments; returns only the keys present."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(key or f"line {lineno}", "expected key=value")
        if key not in _KINDS:
            raise ConfigError(key, f"unknown key on line {lineno}")
        out[key] = _parse_value(key, value)
    return out


def emit_config(cfg: RunConfig) -> str:
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if value is None or value == ():
            continue
        lines.append(f"{f.name}={_emit_value(value)}")
    return "\n".join(lines) + "\n"


def load_config(text: str) -> RunConfig:
    return validate_config(RunConfig(**parse_config(text)))


def validate_config(cfg: RunConfig) -> RunConfig:
    if cfg.walk not in WALKS:
        raise ConfigError("walk", f"must be one of {WALKS}")
    if cfg.topology not in TOPOLOGIES:
        raise ConfigError("topology", f"must be one of {TOPOLOGIES}")
    if cfg.initial not in INITIALS:
        raise ConfigError("initial", f"must be one of {INITIALS}")
    if cfg.upper_moves not in ("left", "right"):
        raise ConfigError("upper_moves", "must be 'left' or 'right'")
    if cfg.method not in ("direct", "spectral"):
        raise ConfigError("method", "must be 'direct' or 'spectral'")
    if cfg.steps < 0:
        raise ConfigError("steps", "must be non-negative")
    coinless = ("v0", "alpha", "beta", "phi1", "phi2")
    coined = ("rho", "theta", "varphi")
    if cfg.walk == "two_site":
        if cfg.v0 is not None:
            if cfg.alpha is not None or cfg.beta is not None:
                raise ConfigError("v0", "give either v0 or alpha/beta, not both")
            if not 0.0 <= cfg.v0 <= 1.0:
                raise ConfigError("v0", "must lie in [0, 1]")
        elif cfg.tessellation is None:
            for name in ("alpha", "beta"):
                if getattr(cfg, name) is None:
                    raise ConfigError(name, "required for the two_site walk (or give v0)")
        clash = coined
    elif cfg.walk == "coined":
        if cfg.rho is None:
            raise ConfigError("rho", "required for the coined walk")
        clash = coinless
    else:
        clash = coinless + coined
    for name in clash:
        if getattr(cfg, name) is not None:
            raise ConfigError(name, f"not a parameter of the {cfg.walk} walk")
    if cfg.topology == "cycle":
        if cfg.N is None:
            raise ConfigError("N", "required for cycle topology")
        if cfg.N < 2 or cfg.N % 2:
            raise ConfigError("N", "cycle needs an even number of sites")
        if cfg.walk == "three_site" and cfg.N % 4:
            raise ConfigError("N", "three_site walk on a cycle needs 4 | N")
    for name in ("sizes", "termf_sizes"):
        for n in getattr(cfg, name):
            if n < 2 or n % 2:
                raise ConfigError(name, f"cycle size {n} is not even")
    for e in cfg.epsilon:
        if not e > 0:
            raise ConfigError("epsilon", "must be positive")
    if cfg.n_k < 1:
        raise ConfigError("n_k", "must be positive")
    if cfg.v_bins is not None and cfg.v_bins < 1:
        raise ConfigError("v_bins", "must be positive")
    return cfg


# --- simulate ---------------------------------------------------------------


def _coined_initial(cfg: RunConfig) -> CoinedState:
    up, low = (1.0, 0.0) if cfg.initial == "delta" else (1 / math.sqrt(2), 1j / math.sqrt(2))
    return CoinedState.localized(up, low, cfg.N if cfg.topology == "cycle" else None)


def _rows_for(t: int, sites, probs, topology: str):
    probs = np.asarray(probs)
    if topology == "line":
        nz = np.flatnonzero(probs > 0)
        lo, hi = (nz[0], nz[-1]) if nz.size else (0, -1)
        sites, probs = sites[lo : hi + 1], probs[lo : hi + 1]
    return [(t, int(s), float(p)) for s, p in zip(sites, probs)]


def simulate_rows(cfg: RunConfig) -> list[tuple]:
    rows = []
    if cfg.walk == "coined":
        state, coin = _coined_initial(cfg), cfg.coin_params()
        for t in range(cfg.steps + 1):
            rows += _rows_for(t, state.sites, state.pdf(), cfg.topology)
            if t < cfg.steps:
                state = step_coined(state, coin, cfg.upper_moves)
        return rows
    kind = "delta_origin" if cfg.initial == "delta" else "symmetric"
    state = initial_state(kind, cfg.topology, cfg.N)
    if cfg.walk == "two_site" and cfg.method == "spectral":
        if cfg.topology != "line" or cfg.initial != "delta":
            raise ConfigError("method", "spectral simulation covers the delta start on the line")
        rows += _rows_for(0, state.sites, pdf(state), "line")
        for t in range(1, cfg.steps + 1):
            st = spectral.spectral_window(t, cfg.walk_params(), cfg.M)
            rows += _rows_for(t, st.sites, pdf(st), "line")
        return rows
    for t in range(cfg.steps + 1):
        rows += _rows_for(t, state.sites, pdf(state), cfg.topology)
        if t < cfg.steps:
            if cfg.walk == "two_site":
                state = step_coinless2(state, cfg.walk_params())
            else:
                state = step_coinless3(state)
    return rows


def _write(cfg: RunConfig, header, rows, stdout) -> None:
    if cfg.output is None:
        stdout.write(",".join(header) + "\n")
        for r in rows:
            stdout.write(",".join(_emit_value(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in r) + "\n")
        return
    try:
        write_rows(cfg.output, header, rows)
    except OSError as exc:
        raise ConfigError("output", f"cannot write {cfg.output!r} ({exc.strerror})") from None


def cmd_simulate(cfg: RunConfig, stdout=sys.stdout) -> int:
    _write(cfg, ("t", "site", "prob"), simulate_rows(cfg), stdout)
    return EXIT_OK


# --- spectrum ---------------------------------------------------------------


def spectrum_rows(cfg: RunConfig):
    if cfg.walk == "coined":
        raise ConfigError("walk", "spectrum covers the coinless walks")
    if cfg.walk == "three_site":
        k = -math.pi + 2 * math.pi * np.arange(cfg.n_k) / cfg.n_k
        mats = spectral.reduced4_matrix(k)
        rows = []
        for kk, R in zip(k, mats):
            red = spectral.ReducedPropagator4(float(kk), R)
            c = red.cos_theta
            flat = int(np.sum(np.abs(red.eigenvalues() - 1.0) < 1e-10))
            rows.append((float(kk), float(c), float(math.acos(max(-1.0, min(1.0, c)))), flat))
        return ("k", "cos_theta", "theta", "flat_multiplicity"), rows
    p = cfg.walk_params()
    if cfg.topology == "cycle":
        spec = cycle.cycle_spectrum(cfg.N, p)
        h = cfg.N // 2
        rows = [
            (k, float(spec.phases[k]), float(spec.phases[h + k]), float(spec.Cplus[k]), float(spec.Cminus[k]))
            for k in range(h)
        ]
        return ("k", "lambda_plus", "lambda_minus", "Cplus", "Cminus"), rows
    return ("k", "theta", "reA", "imA", "reB", "imB"), [tuple(float(v) for v in r) for r in spectral.dispersion(p, cfg.n_k)]


def cmd_spectrum(cfg: RunConfig, stdout=sys.stdout) -> int:
    header, rows = spectrum_rows(cfg)
    _write(cfg, header, rows, stdout)
    return EXIT_OK


# --- asymptotic -------------------------------------------------------------


def asymptotic_rows(cfg: RunConfig):
    if cfg.walk != "two_site" or cfg.topology != "line":
        raise ConfigError("walk", "asymptotics need the two_site walk on the line")
    if cfg.steps < 1:
        raise ConfigError("steps", "must be at least 1")
    p = cfg.walk_params()
    try:
        v0 = asymptotics._check_family(p)
    except ValueError as exc:
        raise ConfigError("beta", str(exc)) from None
    kind = "delta_origin" if cfg.initial == "delta" else "symmetric"
    state = step_coinless2(initial_state(kind), p, steps=cfg.steps)
    rows = asymptotics.comparison_rows(state, p)
    if cfg.v_bins is None:
        return rows
    edges = np.linspace(-v0, v0, cfg.v_bins + 1)
    arr = np.array(rows)
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = (arr[:, 0] >= lo) & (arr[:, 0] < hi)
        if m.any():
            out.append((0.5 * (lo + hi), *(float(c) for c in arr[m, 1:].mean(axis=0))))
    return out


def cmd_asymptotic(cfg: RunConfig, stdout=sys.stdout) -> int:
    _write(cfg, ("v", "rho_sim", "rho_asym", "rho_env"), asymptotic_rows(cfg), stdout)
    return EXIT_OK


# --- mixing -----------------------------------------------------------------


def _mixing_job(args):
    n, p, tmax_over_n, eps, horizon = args
    pi = cycle.limiting_pdf(n, p)
    t_max = max(1, int(round(tmax_over_n * n)))
    if eps:
        reports = cycle.mixing_times(n, p, eps, horizon)
        curve = np.array([v for _, v in reports[0].tvd_samples])
        taus = [(n, r.epsilon, r.tau_epsilon, len(curve)) for r in reports]
        curve = curve[:t_max] if len(curve) >= t_max else cycle.tvd_curve(n, p, t_max, pi)
    else:
        curve, taus = cycle.tvd_curve(n, p, t_max, pi), []
    return n, pi, curve, taus


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(THREADS_ENV, f"not an integer: {raw!r}") from None


def cmd_mixing(cfg: RunConfig, stdout=sys.stdout) -> int:
    if cfg.walk != "two_site":
        raise ConfigError("walk", "mixing covers the two_site walk")
    sizes = cfg.sizes or ((cfg.N,) if cfg.N else ())
    if not sizes:
        raise ConfigError("sizes", "give sizes=... or N=...")
    if cfg.output is None:
        raise ConfigError("output", "mixing writes a directory of CSV files")
    try:
        os.makedirs(cfg.output, exist_ok=True)
    except OSError as exc:
        raise ConfigError("output", f"cannot create {cfg.output!r} ({exc.strerror})") from None
    p = cfg.walk_params()
    jobs = [(n, p, cfg.tmax_over_n, cfg.epsilon, cfg.horizon) for n in sizes]
    workers = min(_threads(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_mixing_job, jobs))
    else:
        results = [_mixing_job(j) for j in jobs]
    taus = []
    for n, pi, curve, tau_rows in results:
        write_rows(os.path.join(cfg.output, f"pi_N{n}.csv"), ("x", "pi"), [(x, float(v)) for x, v in enumerate(pi)])
        t = np.arange(1, len(curve) + 1)
        write_rows(
            os.path.join(cfg.output, f"tvd_N{n}.csv"),
            ("t", "tvd", "t_over_N", "rescaled"),
            [(int(a), float(b), float(a / n), float(a * b / n)) for a, b in zip(t, curve)],
        )
        taus += tau_rows
    if taus:
        write_rows(os.path.join(cfg.output, "mixing.csv"), ("N", "epsilon", "tau", "horizon"), taus)
    if cfg.termf_sizes:
        write_rows(
            os.path.join(cfg.output, "termf.csv"),
            ("N", "term1", "term2", "term3"),
            [(n, *cycle.termf_decomposition(n, p)) for n in cfg.termf_sizes],
        )
    stdout.write(f"wrote {len(results)} size(s) to {cfg.output}\n")
    return EXIT_OK


# --- validate ---------------------------------------------------------------


def cmd_validate(cfg: RunConfig, stdout=sys.stdout) -> int:
    if cfg.tessellation:
        paths = cfg.tessellation.split(",")
        tess = []
        for path in paths:
            try:
                with open(path) as fh:
                    tess.append(parse_tessellation(fh.read()))
            except OSError as exc:
                raise ConfigError("tessellation", f"cannot read {path!r} ({exc.strerror})") from None
            except TessellationParseError as exc:
                raise ConfigError("tessellation", f"{path}: {exc}") from None
        if len(tess) > 2:
            raise ConfigError("tessellation", "give one file or a comma-separated pair")
        pair = (tess[0], tess[1] if len(tess) == 2 else None)
    elif cfg.walk == "two_site":
        pair = two_site_tessellations(cfg.walk_params())
    elif cfg.walk == "three_site":
        pair = three_site_tessellations()
    else:
        raise ConfigError("walk", "the coined walk has no tessellation")
    first = validate_tessellation(pair[0])
    stdout.write("[tessellation 0]\n" + first.text() + "\n")
    ok = first.disjoint and first.unit_norms
    if pair[1] is not None:
        second = validate_tessellation(pair[1])
        joint = validate_tessellation(pair[0], pair[1])
        stdout.write("[tessellation 1]\n" + second.text() + "\n")
        stdout.write("[combined]\n" + joint.text() + "\n")
        ok = ok and second.disjoint and second.unit_norms and joint.ok
    stdout.write(f"overall: {'pass' if ok else 'FAIL'}\n")
    return EXIT_OK if ok else EXIT_NUMERIC


COMMANDS = {
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "asymptotic": cmd_asymptotic,
    "mixing": cmd_mixing,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coinless_walk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key=value file; flags override it")
        for key in _KINDS:
            sp.add_argument(f"--{key}", dest=f"opt_{key}", metavar=_KINDS[key].upper())
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    values = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                values.update(parse_config(fh.read()))
        except OSError as exc:
            raise ConfigError("config", f"cannot read {ns.config!r} ({exc.strerror})") from None
    for key in _KINDS:
        raw = getattr(ns, f"opt_{key}")
        if raw is not None:
            values[key] = _parse_value(key, raw)
    return validate_config(RunConfig(**values))


def main(argv=None, stdout=sys.stdout, stderr=sys.stderr) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return COMMANDS[ns.command](cfg, stdout)
    except ConfigError as exc:
        stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (TopologyError, NormalizationError, cycle.InconclusiveError, FloatingPointError, ArithmeticError) as exc:
        stderr.write(f"numeric error: {exc}\n")
        return EXIT_NUMERIC
    except ValueError as exc:
        stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
