import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from coinless_walk.core import LineState, WalkParams, initial_state
from coinless_walk.evolution import step_coinless2, step_coinless3
from coinless_walk.spectral import (
    AccuracyWarning,
    degenerate_k,
    dispersion,
    flat_band_projectors,
    localization_weight,
    quadrature_points,
    reduced2,
    reduced2_arrays,
    reduced4,
    reduced4_matrix,
    spectral_window,
    static_flat_band2,
    wavefunction_spectral,
)

from conftest import random_angles

angles = st.floats(0, 2 * math.pi, allow_nan=False)
momenta = st.floats(-math.pi, math.pi, allow_nan=False)


@given(momenta, angles, angles, angles, angles)
def test_reduced2_unitary(k, a, b, p1, p2):
    r = reduced2(k, WalkParams(a, b, p1, p2))
    assert abs(r.A) ** 2 + abs(r.B) ** 2 == pytest.approx(1.0, abs=1e-12)
    U = r.matrix()
    assert np.abs(U.conj().T @ U - np.eye(2)).max() < 1e-12
    assert math.cos(r.theta) == pytest.approx(r.A.real, abs=1e-12)
    assert 0 <= r.theta <= math.pi


def test_many_random_draws_normalized(rng):
    k = rng.uniform(-math.pi, math.pi, 10_000)
    worst = 0.0
    for chunk in np.split(k, 10):
        A, B, *_ = reduced2_arrays(chunk, WalkParams(*random_angles(rng)))
        worst = max(worst, np.abs(np.abs(A) ** 2 + np.abs(B) ** 2 - 1).max())
    assert worst < 1e-12


@given(momenta, st.floats(0.01, 1.0))
def test_light_cone_family_dispersion(k, v0):
    r = reduced2(k, WalkParams.from_velocity(v0))
    assert math.cos(r.theta) == pytest.approx(1 - 2 * v0**2 * math.sin(k) ** 2, abs=1e-12)


def test_theta_zero_at_k_zero():
    assert reduced2(0.0, WalkParams.from_velocity(0.6)).theta == pytest.approx(0.0, abs=1e-7)


def test_oscillation_case_has_vanishing_A():
    A = reduced2_arrays(np.linspace(-3, 3, 7), WalkParams(0.0, math.pi / 2))[0]
    assert np.abs(A).max() < 1e-15


def test_eigenvector_completeness(rng):
    for _ in range(50):
        r = reduced2(rng.uniform(-math.pi, math.pi), WalkParams(*random_angles(rng)))
        vp, vm = r.eigenvectors()
        np.testing.assert_allclose(np.outer(vp, vp.conj()) + np.outer(vm, vm.conj()), np.eye(2), atol=1e-10)
        np.testing.assert_allclose(r.matrix() @ vp, np.exp(1j * r.theta) * vp, atol=1e-10)


def test_degenerate_k_examples():
    assert degenerate_k(WalkParams(math.pi / 3, math.pi / 3)) == pytest.approx([-math.pi / 2, math.pi / 2])
    assert degenerate_k(WalkParams.from_velocity(0.75)) == pytest.approx([-math.pi, 0.0, math.pi])
    assert degenerate_k(WalkParams(math.pi / 5, math.pi / 3, 0.1, 0.2)) == []


def test_degenerate_k_wraps_angles():
    # alpha and beta equal modulo 2 pi
    assert degenerate_k(WalkParams(math.pi / 3, math.pi / 3 + 2 * math.pi)) == pytest.approx([-math.pi / 2, math.pi / 2])


def test_spectral_t0_is_delta():
    s = spectral_window(0, WalkParams(0.4, 1.2))
    assert s.amplitude(0) == pytest.approx(1.0)
    assert np.abs(np.delete(s.amps, -s.offset)).max() < 1e-15


def test_spectral_lockstep():
    assert abs(wavefunction_spectral(0, 1, WalkParams(math.pi / 2, math.pi / 2))) < 1e-15


def test_spectral_matches_direct_random(rng):
    for _ in range(20):
        p = WalkParams(*random_angles(rng))
        t = int(rng.integers(1, 51))
        direct = step_coinless2(initial_state(), p, steps=t)
        spec = spectral_window(t, p)
        lo, hi = -2 * t - 2, 2 * t + 3
        assert np.abs(direct.on_window(lo, hi) - spec.on_window(lo, hi)).max() < 1e-9


@pytest.mark.parametrize(
    "p", [WalkParams(math.pi / 3, math.pi / 3), WalkParams.from_velocity(0.75), WalkParams(0.0, 0.0), WalkParams(0.0, math.pi / 2)]
)
def test_spectral_matches_direct_degenerate(p):
    t = 17
    direct = step_coinless2(initial_state(), p, steps=t)
    spec = spectral_window(t, p)
    assert np.abs(direct.on_window(-40, 40) - spec.on_window(-40, 40)).max() < 1e-10


def test_too_few_points_warns():
    with pytest.warns(AccuracyWarning):
        spectral_window(10, WalkParams(0.3, 0.5), M=20, sites=[0, 1])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        spectral_window(10, WalkParams(0.3, 0.5), M=quadrature_points(10))


def test_dispersion_rows():
    rows = dispersion(WalkParams.from_velocity(0.75), 256)
    k = np.array([r[0] for r in rows])
    th = np.array([r[1] for r in rows])
    np.testing.assert_allclose(np.cos(th), 1 - 2 * 0.75**2 * np.sin(k) ** 2, atol=1e-12)


def test_two_site_has_no_flat_band(rng):
    for _ in range(10):
        assert not static_flat_band2(WalkParams(*random_angles(rng)))
    assert static_flat_band2(WalkParams(math.pi, 0.0))


@given(momenta)
def test_reduced4_properties(k):
    r = reduced4(k)
    U = r.matrix
    assert np.abs(U.conj().T @ U - np.eye(4)).max() < 1e-12
    w = r.eigenvalues()
    assert np.sum(np.abs(w - 1) < 1e-10) == 2
    others = w[np.abs(w - 1) >= 1e-10]
    np.testing.assert_allclose(others.real, r.cos_theta, atol=1e-10)


def test_reduced4_examples():
    assert reduced4(0.0).cos_theta == pytest.approx(-1 / 9)
    assert reduced4(math.pi / 4).cos_theta == pytest.approx(-1.0)


def test_flat_projector_closed_form():
    for k in np.linspace(-3, 3, 13):
        r = reduced4(k)
        R, c = r.matrix, r.cos_theta
        P = (R @ R - 2 * c * R + np.eye(4)) / (2 * (1 - c))
        np.testing.assert_allclose(P, r.flat_projector(), atol=1e-10)


def test_localization_weight_delta():
    w = localization_weight(initial_state())
    assert w == pytest.approx(1 - 1 / math.sqrt(5), abs=1e-10)


def test_state_without_flat_component():
    n = 256
    sites = np.arange(-n // 2, n // 2)
    k = -math.pi + 2 * math.pi * np.arange(n) / n
    a = np.zeros((n, 4), dtype=complex)
    a[:, 0] = np.exp(1j * 0 * k)  # transform of |0>
    Q = np.eye(4) - flat_band_projectors(k)
    b = np.einsum("kij,kj->ki", Q, a)
    amps = np.array([np.sum(b[:, m % 4] * np.exp(-1j * k * m)) / n for m in sites])
    state = LineState(int(sites[0]), amps / np.linalg.norm(amps))
    assert localization_weight(state, n_k=n) < 1e-10


def test_three_site_time_mean_matches_flat_band():
    s = step_coinless3(initial_state(), steps=100)
    vals = []
    for _ in range(101):
        vals.append(abs(s.amplitude(0)) ** 2)
        s = step_coinless3(s)
    from coinless_walk.spectral import localized_site_probability

    pred = localized_site_probability(initial_state())
    assert abs(np.mean(vals) - pred) / pred < 0.02
