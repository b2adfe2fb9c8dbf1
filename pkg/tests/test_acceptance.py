"""Acceptance criteria, one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines inline; they are also
collected into a summary at the end of the session.
"""

import math
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES as SUMMARY

from coinless_walk import WalkParams, initial_state, pdf
from coinless_walk.core import LineState
from coinless_walk.asymptotics import calibration_constant, front_positions, rescaled_profile
from coinless_walk.cycle import limiting_pdf, mixing_times, termf_decomposition, time_averaged_pdf, tvd_curve
from coinless_walk.evolution import CoinedState, CoinParams, coinless_to_coined, step_coined, step_coinless2, step_coinless3
from coinless_walk.spectral import localized_site_probability, reduced4_matrix, spectral_window

FIG = WalkParams(math.pi / 2, 2 * math.pi / 3)
V0 = 0.75


@pytest.fixture
def report(capsys):
    def emit(label: str, ok: bool, detail: str) -> bool:
        line = f"{label}: {'PASS' if ok else 'FAIL'}  {detail}"
        SUMMARY.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return emit


def r_squared(y, fit):
    y, fit = np.asarray(y, float), np.asarray(fit, float)
    return 1.0 - np.sum((y - fit) ** 2) / np.sum((y - y.mean()) ** 2)


def test_criterion_1_unitarity(report):
    rng = np.random.default_rng(1)
    p = WalkParams(*rng.uniform(0, 2 * math.pi, 4))
    coin = CoinParams(0.4, 2.1, 0.7)
    start = time.perf_counter()
    drifts = {}
    for topo, n in (("line", None), ("cycle", 1024)):
        s2 = step_coinless2(initial_state("delta_origin", topo, n), p, steps=1000)
        s3 = step_coinless3(initial_state("delta_origin", topo, n), steps=1000)
        sc = step_coined(CoinedState.localized(1 / math.sqrt(2), 1j / math.sqrt(2), n), coin, steps=1000)
        drifts[f"2site/{topo}"] = abs(s2.norm() - 1)
        drifts[f"3site/{topo}"] = abs(s3.norm() - 1)
        drifts[f"coined/{topo}"] = abs(sc.norm() - 1)
    elapsed = time.perf_counter() - start
    worst = max(drifts.values())
    ok = worst < 1e-10 and elapsed < 5.0
    assert report("CRITERION 1 unitarity", ok, f"max |norm-1| = {worst:.1e}, runtime {elapsed:.2f} s")


def test_criterion_2_spectral_equivalence(report):
    p = WalkParams.from_velocity(V0)
    start = time.perf_counter()
    direct = step_coinless2(initial_state(), p, steps=30)
    spec = spectral_window(30, p, M=4 * 30 + 4)
    lo, hi = spec.sites[0], spec.sites[-1]
    dev = float(np.max(np.abs(spec.amps - direct.on_window(lo, hi))))
    # the direct window may be padded; nothing may live outside the spectral one
    outside = (direct.sites < lo) | (direct.sites > hi)
    dev = max(dev, float(np.max(np.abs(direct.amps[outside]), initial=0.0)))
    elapsed = time.perf_counter() - start
    ok = dev < 1e-9 and elapsed < 5.0
    assert report("CRITERION 2 direct vs spectral", ok, f"max amplitude deviation {dev:.1e}, runtime {elapsed:.2f} s")


def test_criterion_3_coined_equivalence(report):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(20):
        a, p1, p2 = rng.uniform(0, 2 * math.pi, 3)
        p = WalkParams(a, math.pi / 2, p1, p2)
        m = coinless_to_coined(p)
        direct = step_coinless2(initial_state(), p, steps=100)
        coined = step_coined(CoinedState.localized(1.0, 0.0), m.coin, "right", steps=100)
        lo, hi = coined.sites[0], coined.sites[-1]
        pairs = direct.on_window(2 * lo, 2 * hi + 1)
        phase = np.exp(1j * (p1 + p2) * 100)
        dev = max(np.max(np.abs(pairs[0::2] - phase * coined.upper)), np.max(np.abs(pairs[1::2] - phase * coined.lower)))
        worst = max(worst, float(dev))
    assert report("CRITERION 3 coinless vs coined", worst < 1e-12, f"max deviation over 20 draws {worst:.1e}")


def test_criterion_4_asymptotic_profile(report):
    p = WalkParams.from_velocity(V0)
    edges = np.round(np.arange(-0.6, 0.6 + 1e-9, 0.1), 12)
    late = rescaled_profile(200, p, edges)
    scale = calibration_constant(late)
    dev_late = float(np.max(late.relative_deviation(scale)))
    dev_early = float(np.max(rescaled_profile(30, p, edges).relative_deviation(scale)))
    s = step_coinless2(initial_state(), p, steps=200)
    left, right = front_positions(s.sites, pdf(s), 200, V0)
    pole = max(abs(left + V0), abs(right - V0))
    ok = dev_early < 0.05 and dev_late < 0.05 and pole <= 0.02
    detail = (
        f"calibration c = {scale:.4f}; max rel. deviation t=30 {dev_early:.2%}, t=200 {dev_late:.2%}; "
        f"fronts at v = {left:.3f}, {right:.3f}"
    )
    assert report("CRITERION 4 asymptotic profile", ok, detail)


def _three_site_p0(t_max):
    s, out = initial_state(), []
    for _ in range(t_max):
        s = step_coinless3(s)
        out.append(abs(s.amplitude(0)) ** 2)
    return np.array(out)


def test_criterion_5_localization_pointwise(report):
    # literal reading: every p_0(t), t in [50, 200], within 2% of the flat-band value
    pred = localized_site_probability(initial_state(), 0)
    p0 = _three_site_p0(200)[49:]
    dev = float(np.max(np.abs(p0 - pred)) / pred)
    ok = dev < 0.02
    assert report("CRITERION 5 localization (pointwise 2%)", ok, f"flat-band p0 = {pred:.7f}, max rel. deviation {dev:.2%}")


def test_criterion_5_localization_floor(report):
    pred = localized_site_probability(initial_state(), 0)
    p0 = _three_site_p0(200)
    floor = float(p0[19:].min() / p0[19])
    mean_dev = abs(float(p0[49:].mean()) - pred) / pred
    ok = floor > 0.5 and mean_dev < 0.02
    detail = f"min p0(t)/p0(20) over t >= 20 = {floor:.3f}; time-mean over [50, 200] within {mean_dev:.2%} of flat band"
    assert report("CRITERION 5b localization (floor, time mean)", ok, detail)


def test_criterion_6_reduced_operator(report):
    k = np.linspace(-math.pi, math.pi, 256, endpoint=False)
    mats = reduced4_matrix(k)
    unit = float(np.max(np.abs(mats.conj().transpose(0, 2, 1) @ mats - np.eye(4))))
    flat_err, cos_err = 0.0, 0.0
    for kk, R in zip(k, mats):
        ev = np.linalg.eigvals(R)
        order = np.argsort(np.abs(ev - 1))
        flat_err = max(flat_err, float(np.max(np.abs(ev[order[:2]] - 1))))
        rest = ev[order[2:]]
        if np.min(np.abs(rest - 1)) < 1e-6:
            flat_err = max(flat_err, 1.0)  # a third eigenvalue at 1 breaks multiplicity 2
        cos_err = max(cos_err, float(np.max(np.abs(rest.real - (4 * math.cos(4 * kk) - 5) / 9))))
    ok = unit < 1e-12 and flat_err < 1e-10 and cos_err < 1e-10
    detail = f"unitarity {unit:.1e}, flat eigenvalue {flat_err:.1e}, cos theta {cos_err:.1e}"
    assert report("CRITERION 6 reduced 4x4 operator", ok, detail)


def _spike_ratio(pi, x):
    return float(pi[x] / np.median(pi))


def test_criterion_7_limiting_spikes(report):
    pi = limiting_pdf(200, FIG)
    total = abs(float(pi.sum()) - 1)
    r0, rh = _spike_ratio(pi, 0), _spike_ratio(pi, 100)
    ok = total < 1e-10 and r0 > 2 and rh > 2
    detail = f"|sum - 1| = {total:.1e}; pi/median at x=0: {r0:.2f}, at x=N/2: {rh:.2f} (threshold 2)"
    assert report("CRITERION 7 limiting PDF spikes (N=200)", ok, detail)


def test_criterion_7_no_spike_and_long_average(report):
    pi198 = limiting_pdf(198, FIG)
    r198 = _spike_ratio(pi198, 99)
    T = 10**6
    pi16 = limiting_pdf(16, FIG)
    gap = float(np.max(np.abs(pi16 - time_averaged_pdf(16, FIG, T))))
    ok = abs(float(pi198.sum()) - 1) < 1e-10 and r198 < 1.2 and gap < 10 / T
    detail = f"N=198 pi/median at x=N/2: {r198:.2f}; N=16 |pi - pbar(1e6)| = {gap:.1e} (limit {10 / T:.0e})"
    assert report("CRITERION 7b no spike at N=198, long average", ok, detail)


def test_criterion_8_mixing_scaling(report):
    start = time.perf_counter()
    bins = np.round(np.arange(0.05, 0.5 + 1e-9, 0.05), 12)
    local = []
    for n in (500, 2000, 5000):
        curve = tvd_curve(n, FIG, n // 2)
        t = np.arange(1, len(curve) + 1)
        u, y = t / n, t * curve / n
        local.append([y[(u >= lo) & (u < hi)].mean() for lo, hi in zip(bins[:-1], bins[1:])])
    local = np.array(local)
    spread = float(np.max((local.max(axis=0) - local.min(axis=0)) / local.mean(axis=0)))

    sizes = np.arange(100, 1001, 100)
    term1 = np.array([termf_decomposition(int(n), FIG)[0] for n in sizes])
    c1 = np.dot(term1, sizes) / np.dot(sizes, sizes)
    r2_term1 = r_squared(term1, c1 * sizes)

    eps = (0.05, 0.02, 0.01)
    x, tau = [], []
    for n in (500, 1000, 2000):
        for r in mixing_times(n, FIG, eps):
            x.append(n / r.epsilon)
            tau.append(r.tau_epsilon)
    x, tau = np.array(x), np.array(tau, float)
    c_tau = np.dot(tau, x) / np.dot(x, x)
    r2_tau = r_squared(tau, c_tau * x)
    elapsed = time.perf_counter() - start

    ok = spread < 0.10 and r2_term1 > 0.99 and r2_tau > 0.98 and elapsed < 600
    detail = (
        f"collapse spread {spread:.2%}; term1 = {c1:.4f} N (R^2 {r2_term1:.5f}); "
        f"tau = {c_tau:.4f} N/eps (R^2 {r2_tau:.5f}); runtime {elapsed:.0f} s"
    )
    assert report("CRITERION 8 mixing scaling", ok, detail)


def test_criterion_9_trivial_dynamics(report):
    rng = np.random.default_rng(9)
    amps = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi = LineState(-4, amps / np.linalg.norm(amps))
    errs = {}

    # one sublattice moves rigidly by two sites per step
    even = np.zeros(8, complex)
    even[0::2] = amps[0::2] / np.linalg.norm(amps[0::2])
    p = WalkParams(math.pi / 2, math.pi / 2)
    s, widths = LineState(-4, even), []
    for _ in range(20):
        s = step_coinless2(s, p)
        lo, hi = s.support(1e-14)
        widths.append(hi - lo)
    shift = float(np.max(np.abs(np.abs(s.on_window(36, 43)) - np.abs(even))))
    errs["lockstep"] = shift + (0.0 if len(set(widths)) == 1 else 1.0)

    p = WalkParams(0.0, math.pi / 2)
    s2 = step_coinless2(psi, p, steps=2)
    lo, hi = -4, 3
    errs["period-2"] = float(np.max(np.abs(s2.on_window(lo, hi) + psi.on_window(lo, hi))))

    p = WalkParams(0.0, 0.0)
    s1 = step_coinless2(psi, p)
    ratio = s1.on_window(lo, hi) / psi.on_window(lo, hi)
    errs["stationary"] = float(np.max(np.abs(ratio - ratio[0])) + abs(abs(ratio[0]) - 1))

    worst = max(errs.values())
    detail = ", ".join(f"{k} {v:.1e}" for k, v in errs.items())
    assert report("CRITERION 9 trivial dynamics", worst <= 1e-14, detail)
