"""Model layer: vector fields against brute-force oracles, symmetry
transforms against solve-then-transform runs, and the exact solution families."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kuramoto_lock import (
    IntegratorConfig,
    PhaseState,
    SystemParams,
    diameter,
    dilate_transform,
    galilean_transform,
    mean_closed_form,
    nonsync_exact,
    record_trajectory,
    rhs_first_order,
    rhs_inertial,
)
from kuramoto_lock.model import coupling_direct, coupling_mean_field

TWO_PI = 2.0 * np.pi


def random_instance(rng, n=5, m=1.0, kappa=1.0, d_v=0.8, d_om=1.0):
    params = SystemParams(m, kappa, rng.uniform(-d_v / 2, d_v / 2, n))
    state = PhaseState(0.0, rng.uniform(0, TWO_PI, n), rng.uniform(-d_om / 2, d_om / 2, n))
    return params, state


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

def test_params_validation():
    with pytest.raises(ValueError):
        SystemParams(-0.1, 1.0, [0.0])
    with pytest.raises(ValueError):
        SystemParams(1.0, -1.0, [0.0])
    with pytest.raises(ValueError):
        SystemParams(1.0, 1.0, [])
    with pytest.raises(ValueError):
        SystemParams(1.0, 1.0, [np.nan])
    p = SystemParams(0.5, 2.0, [1.0, 3.0])
    assert p.n == 2 and p.nu_c == 2.0 and p.nu_diameter == 2.0
    with pytest.raises(ValueError):
        p.nu[0] = 5.0  # frozen storage


def test_state_validation():
    with pytest.raises(ValueError):
        PhaseState(0.0, [0.0, 1.0], [0.0])
    with pytest.raises(ValueError):
        PhaseState(0.0, [np.inf], [0.0])
    s = PhaseState(1.5, [0.0, 2.0], [0.5, -0.5])
    assert s.theta_c == 1.0 and s.omega_c == 0.0


def test_variance_diameter_inequality(rng):
    for _ in range(100):
        x = rng.normal(size=rng.integers(1, 20))
        assert np.var(x) <= diameter(x) ** 2 / 4 + 1e-15


@given(
    st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=12),
    st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=12),
)
def test_diameter_triangle_inequality(a, b):
    n = min(len(a), len(b))
    a = np.asarray(a[:n])
    b = np.asarray(b[:n])
    assert abs(diameter(a) - diameter(b)) <= diameter(a - b) + 1e-9


# ---------------------------------------------------------------------------
# Vector fields
# ---------------------------------------------------------------------------

def test_rhs_inertial_trivial_identical():
    p = SystemParams(0.7, 3.0, [0.0, 0.0])
    s = PhaseState(0.0, [1.3, 1.3], [0.0, 0.0])
    _, domega = rhs_inertial(p, s)
    assert np.all(domega == 0.0)


def test_rhs_inertial_quarter_circle():
    p = SystemParams(1.0, 2.0, [0.0, 0.0])
    s = PhaseState(0.0, [0.0, np.pi / 2], [0.0, 0.0])
    dtheta, domega = rhs_inertial(p, s)
    assert np.allclose(dtheta, [0.0, 0.0])
    assert np.allclose(domega, [1.0, -1.0], atol=1e-15)


def test_rhs_matches_double_loop_oracle(rng):
    p, s = random_instance(rng, n=3, m=0.8, kappa=1.7)

    def oracle(i):
        total = 0.0
        for j in range(3):
            total += math.sin(s.theta[j] - s.theta[i])
        return (p.nu[i] - s.omega[i] + p.kappa / 3 * total) / p.m

    _, domega = rhs_inertial(p, s)
    expected = np.array([oracle(i) for i in range(3)])
    assert np.abs(domega - expected).max() < 1e-14


def test_rhs_inertial_rejects_zero_inertia():
    p = SystemParams(0.0, 1.0, [0.0])
    s = PhaseState(0.0, [0.0], [0.0])
    with pytest.raises(ValueError):
        rhs_inertial(p, s)


def test_rhs_first_order_trivial():
    p = SystemParams(0.0, 2.0, [0.0, 0.0, 0.0])
    assert np.all(rhs_first_order(p, [0.4, 0.4, 0.4]) == 0.0)


def test_rhs_first_order_single_oscillator():
    p = SystemParams(0.0, 5.0, [1.25])
    assert np.allclose(rhs_first_order(p, [2.0]), [1.25])


def test_rhs_first_order_mean_field_identity(rng):
    for _ in range(25):
        p, s = random_instance(rng, n=int(rng.integers(2, 30)))
        z = np.exp(1j * s.theta).mean()
        r, phi = abs(z), np.angle(z)
        if r <= 1e-9:
            continue
        mf = p.nu - p.kappa * r * np.sin(s.theta - phi)
        assert np.abs(rhs_first_order(p, s.theta) - mf).max() < 1e-12


def test_coupling_forms_agree(rng):
    for _ in range(25):
        theta = rng.uniform(-10, 10, int(rng.integers(1, 40)))
        a = coupling_direct(theta, 1.9)
        b = coupling_mean_field(theta, 1.9)
        assert np.abs(a - b).max() < 1e-12


def test_coupling_antisymmetry_mean_acceleration(rng):
    # The pairwise sum cancels, so m*domega_c + omega_c = nu_c at RHS level.
    for _ in range(20):
        p, s = random_instance(rng, n=int(rng.integers(1, 25)), m=0.6, kappa=2.3)
        _, domega = rhs_inertial(p, s)
        resid = abs(p.m * domega.mean() + s.omega.mean() - p.nu_c)
        assert resid < 1e-13


def test_reflection_symmetry(rng):
    p, s = random_instance(rng, n=7)
    pr = SystemParams(p.m, p.kappa, -p.nu)
    sr = PhaseState(0.0, -s.theta, -s.omega)
    _, d1 = rhs_inertial(p, s)
    _, d2 = rhs_inertial(pr, sr)
    assert np.abs(d1 + d2).max() < 1e-13


def test_exchange_symmetry(rng):
    p, s = random_instance(rng, n=9)
    perm = rng.permutation(9)
    pp = SystemParams(p.m, p.kappa, p.nu[perm])
    sp = PhaseState(0.0, s.theta[perm], s.omega[perm])
    _, d1 = rhs_inertial(p, s)
    _, d2 = rhs_inertial(pp, sp)
    assert np.abs(d1[perm] - d2).max() < 1e-13


# ---------------------------------------------------------------------------
# Galilean transform
# ---------------------------------------------------------------------------

def test_galilean_identity_and_t0():
    rng = np.random.default_rng(1)
    p, s = random_instance(rng, n=4)
    p2, s2 = galilean_transform(p, s, 0.0, 0.0, 0.0)
    assert np.all(p2.nu == p.nu) and np.all(s2.theta == s.theta)
    p3, s3 = galilean_transform(p, s, 0.5, 0.2, -0.3)
    assert np.allclose(s3.theta, s.theta - 0.2)
    assert np.allclose(s3.omega, s.omega + 0.3)
    assert np.allclose(p3.nu, p.nu - 0.5)


def test_galilean_solve_transform_commutation(rng):
    cfg = IntegratorConfig(dt=0.01, t_end=10.0, observer_stride=50)
    for seed in range(2):
        local = np.random.default_rng(seed)
        p, s = random_instance(local, n=5)
        shifts = (0.4, -0.6, 0.25)
        pt, st_ = galilean_transform(p, s, *shifts)
        rec = record_trajectory(p, s, cfg)
        rec_t = record_trajectory(pt, st_, cfg)
        worst = 0.0
        for k in range(rec.n_snapshots):
            _, mapped = galilean_transform(p, rec.state(k), *shifts)
            worst = max(worst, np.abs(mapped.theta - rec_t.theta[k]).max())
            worst = max(worst, np.abs(mapped.omega - rec_t.omega[k]).max())
        assert worst < 1e-8


# ---------------------------------------------------------------------------
# Dilation transform
# ---------------------------------------------------------------------------

def test_dilate_identity_and_invariants(rng):
    p, s = random_instance(rng, n=4)
    p1, s1 = dilate_transform(p, s, 1.0)
    assert np.all(p1.nu == p.nu) and np.all(s1.omega == s.omega)
    p2, _ = dilate_transform(p, s, 2.0)
    assert p2.m * p2.kappa == p.m * p.kappa  # exact for power-of-two alpha
    p3, s3 = dilate_transform(p, s, 1.7)
    for before, after in [
        (p.m * p.kappa, p3.m * p3.kappa),
        (p.nu_diameter / p.kappa, p3.nu_diameter / p3.kappa),
        (diameter(s.omega) / p.kappa, diameter(s3.omega) / p3.kappa),
    ]:
        assert abs(before - after) <= 1e-15 * max(1.0, abs(before))


def test_dilate_trajectory_equivalence(rng):
    p, s = random_instance(rng, n=4, m=0.9, kappa=1.1)
    alpha = 2.0
    pd, sd = dilate_transform(p, s, alpha)
    rec = record_trajectory(p, s, IntegratorConfig(dt=0.01, t_end=8.0, observer_stride=100))
    rec_d = record_trajectory(
        pd, sd, IntegratorConfig(dt=0.01 / alpha, t_end=8.0 / alpha, observer_stride=100)
    )
    assert np.abs(rec.theta - rec_d.theta).max() < 1e-8
    assert np.abs(alpha * rec.omega - rec_d.omega).max() < 1e-8


# ---------------------------------------------------------------------------
# Mean closed form
# ---------------------------------------------------------------------------

def test_mean_closed_form_degenerate():
    p = SystemParams(0.8, 1.0, [0.3, -0.3])
    s = PhaseState(0.0, [1.0, 3.0], [0.4, -0.4])
    mt = mean_closed_form(p, s)
    # nu_c = 0 and omega_c0 = 0 freeze the mean.
    for t in (0.0, 1.0, 10.0, 100.0):
        assert abs(mt.theta_c(t) - 2.0) < 1e-14
    assert abs(mt.omega_c(1e6) - p.nu_c) < 1e-12


def test_mean_closed_form_limit():
    p = SystemParams(0.5, 1.0, [1.0, 2.0])
    s = PhaseState(0.0, [0.0, 0.0], [3.0, 1.0])
    mt = mean_closed_form(p, s)
    assert abs(mt.omega_c(0.0) - 2.0) < 1e-15
    assert abs(mt.omega_c(200.0) - 1.5) < 1e-12


def test_mean_closed_form_matches_integration(rng):
    p, s = random_instance(rng, n=10, m=0.7, kappa=1.4)
    mt = mean_closed_form(p, s)
    rec = record_trajectory(p, s, IntegratorConfig(dt=0.01, t_end=10.0, observer_stride=20))
    assert np.abs(rec.theta.mean(axis=1) - mt.theta_c(rec.t)).max() < 1e-7
    assert np.abs(rec.omega.mean(axis=1) - mt.omega_c(rec.t)).max() < 1e-7


# ---------------------------------------------------------------------------
# Zero-centroid exact family
# ---------------------------------------------------------------------------

def nonsync_example(m=1.0, kappa=0.4):
    params = SystemParams(m, kappa, np.array([1.0, 1.0, 2.0, 2.0]))
    state0 = PhaseState(0.0, np.array([0.0, np.pi, 0.0, np.pi]), np.zeros(4))
    return params, state0, [[0, 1], [2, 3]]


def test_nonsync_exact_closed_form():
    params, state0, groups = nonsync_example()
    exact = nonsync_exact(params, state0, groups)
    m = params.m
    for t in np.linspace(0.0, 20.0, 41):
        growth = t - m + m * math.exp(-t / m)
        expected = state0.theta + params.nu * growth
        assert np.abs(exact.theta(t) - expected).max() < 1e-12


def test_nonsync_exact_zero_amplitude():
    params, state0, groups = nonsync_example()
    exact = nonsync_exact(params, state0, groups)
    for t in np.linspace(0.0, 30.0, 100):
        r = abs(np.exp(1j * exact.theta(t)).mean())
        assert r < 1e-12


def test_nonsync_integrator_keeps_zero_amplitude():
    params, state0, groups = nonsync_example()
    rec = record_trajectory(params, state0, IntegratorConfig(dt=0.01, t_end=10.0))
    r = np.abs(np.exp(1j * rec.theta).mean(axis=1))
    assert r.max() < 1e-6


def test_nonsync_exact_rejects_bad_input():
    params, state0, _ = nonsync_example()
    with pytest.raises(ValueError):
        nonsync_exact(params, state0, [[0, 1], [2]])  # not a partition
    with pytest.raises(ValueError):
        nonsync_exact(params, state0, [[0, 2], [1, 3]])  # nonconstant nu in group
    bad_state = PhaseState(0.0, np.array([0.0, np.pi + 1e-3, 0.0, np.pi]), np.zeros(4))
    with pytest.raises(ValueError):
        nonsync_exact(params, bad_state, [[0, 1], [2, 3]])  # centroid off zero
