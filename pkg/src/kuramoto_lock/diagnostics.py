"""Scalar functionals and structural reports over phase configurations and
trajectory snapshots: order parameters, diameters, the interaction potential,
the energy balance, modular clusters, linear arrangement, and numeric
phase-locking detection.

Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import TWO_PI, PhaseState, SystemParams, diameter
from .integrate import TrajectoryRecord

__all__ = [
    "R_PHASE_THRESHOLD",
    "OrderState",
    "ClusterReport",
    "LockTolerances",
    "LockReport",
    "EnergyBalance",
    "PairGap",
    "ArrangementReport",
    "order_state",
    "diameters",
    "potential",
    "energy_value",
    "energy_dissipation_residual",
    "find_majority_cluster",
    "cluster_from_condensation",
    "arrangement_check",
    "arrangement_constant",
    "default_lock_tolerances",
    "detect_locking",
]

# Below this amplitude the centroid phase is treated as undefined.
R_PHASE_THRESHOLD = 1e-12
_FALLBACK_GRID = 64


@dataclass(frozen=True)
class OrderState:
    """Amplitude order parameter ``r``, centroid phase ``phi`` (``None`` when
    the centroid is too small to define one), and mean-square deviation
    ``delta``.  ``delta_fallback`` marks the reporting-only grid fallback used
    when ``phi`` is undefined."""

    r: float
    phi: Optional[float]
    delta: float
    delta_fallback: bool = False


def order_state(theta, r_threshold: float = R_PHASE_THRESHOLD) -> OrderState:
    """Polar decomposition of the phase centroid plus the mean-square
    deviation (1/N) sum sin^2(theta_k - phi)."""
    th = np.asarray(theta, dtype=float)
    z = np.exp(1j * th).mean()
    r = float(abs(z))
    if r < r_threshold:
        # No usable centroid direction: report the best grid phase instead,
        # flagged so downstream consumers can tell it apart.
        grid = np.linspace(0.0, TWO_PI, _FALLBACK_GRID, endpoint=False)
        deltas = np.mean(np.sin(th[None, :] - grid[:, None]) ** 2, axis=1)
        return OrderState(r, None, float(deltas.min()), True)
    phi = float(np.angle(z))
    delta = float(np.mean(np.sin(th - phi) ** 2))
    return OrderState(r, phi, delta, False)


def diameters(state: PhaseState, subset=None) -> tuple[float, float]:
    """Phase and frequency diameters, optionally over a subset of indices."""
    return diameter(state.theta, subset), diameter(state.omega, subset)


def potential(params: SystemParams, theta) -> float:
    """Interaction potential
    ``-sum_k nu_k theta_k + (kappa/2) sum_kl (1 - cos(theta_k - theta_l))``,
    evaluated by the full double sum."""
    th = np.asarray(theta, dtype=float)
    if th.size != params.n:
        raise ValueError("theta/params size mismatch")
    pair = 1.0 - np.cos(th[:, None] - th[None, :])
    return float(-(params.nu * th).sum() + 0.5 * params.kappa * pair.sum())


def energy_value(params: SystemParams, theta, omega) -> float:
    """Energy functional kappa*(1-R^2)/2 + (m/2)*Var(omega).

    Along solutions with identical natural frequencies its time derivative is
    exactly -Var(omega), so it is nonincreasing.
    """
    th = np.asarray(theta, dtype=float)
    om = np.asarray(omega, dtype=float)
    r2 = abs(np.exp(1j * th).mean()) ** 2
    var = float(np.mean((om - om.mean()) ** 2))
    return float(0.5 * params.kappa * (1.0 - r2) + 0.5 * params.m * var)


@dataclass(frozen=True)
class EnergyBalance:
    """Energy series plus the centered-difference residual of the dissipation
    identity, d/dt[energy] + Var(omega), on interior snapshots."""

    times: np.ndarray
    energy: np.ndarray
    t_interior: np.ndarray
    residual: np.ndarray


def _check_uniform_spacing(t: np.ndarray) -> float:
    if t.size < 3:
        raise ValueError("need at least three snapshots")
    h = np.diff(t)
    if not np.allclose(h, h[0], rtol=1e-9, atol=1e-12):
        raise ValueError("snapshots must be equally spaced")
    return float(h[0])


def energy_dissipation_residual(
    params: SystemParams, record: TrajectoryRecord
) -> EnergyBalance:
    """Residual of the exact energy-dissipation identity along a run.

    Requires identical natural frequencies (to 1e-12) and equally spaced
    snapshots.  The residual is O(spacing^2) plus integrator error.
    """
    if params.nu_diameter > 1e-12:
        raise ValueError("energy dissipation requires identical natural frequencies")
    h = _check_uniform_spacing(record.t)
    energy = np.array(
        [energy_value(params, record.theta[k], record.omega[k]) for k in range(record.n_snapshots)]
    )
    var = np.mean((record.omega - record.omega.mean(axis=1, keepdims=True)) ** 2, axis=1)
    dedt = (energy[2:] - energy[:-2]) / (2.0 * h)
    residual = dedt + var[1:-1]
    return EnergyBalance(record.t.copy(), energy, record.t[1:-1].copy(), residual)


@dataclass(frozen=True)
class ClusterReport:
    """A set of oscillators confined, modulo 2*pi, to a common arc.

    ``translations`` holds the integer k_i with theta_i - 2*pi*k_i inside the
    arc; ``arc_diameter`` is the diameter of the translated subvector.
    """

    indices: tuple[int, ...]
    translations: tuple[int, ...]
    arc_diameter: float
    fraction: float

    def translated(self, theta) -> np.ndarray:
        th = np.asarray(theta, dtype=float)
        idx = np.asarray(self.indices, dtype=int)
        k = np.asarray(self.translations, dtype=float)
        return th[idx] - TWO_PI * k


def find_majority_cluster(theta, lam: float, ell: float) -> Optional[ClusterReport]:
    """Largest set of oscillators within a circular arc of length ``ell``.

    Phases are reduced mod 2*pi, residues sorted, and a circular window of
    width ``ell`` slides over them.  Returns the best window's set (largest
    cardinality, ties by smaller arc diameter then earliest window) when it
    reaches ceil(lam*N) members, else ``None``.
    """
    if not (0.0 < lam <= 1.0):
        raise ValueError("lam must lie in (0, 1]")
    if not (0.0 < ell < TWO_PI):
        raise ValueError("ell must lie in (0, 2*pi)")
    th = np.asarray(theta, dtype=float)
    n = th.size
    wraps = np.floor(th / TWO_PI).astype(int)
    res = th - TWO_PI * wraps
    order = np.argsort(res, kind="stable")
    r_sorted = res[order]
    r_ext = np.concatenate([r_sorted, r_sorted + TWO_PI])

    best = None  # (count, arc, start_pos)
    for s in range(n):
        hi = np.searchsorted(r_ext, r_sorted[s] + ell, side="right")
        count = hi - s
        if count > n:
            count = n
            hi = s + n
        arc = r_ext[hi - 1] - r_sorted[s]
        if best is None or count > best[0] or (count == best[0] and arc < best[1]):
            best = (count, arc, s)
    count, arc, s = best
    if count < math.ceil(lam * n):
        return None
    # Members past the 2*pi seam (sorted position wrapped around) translate up.
    members = []
    ks = []
    for k in range(count):
        pos = s + k
        idx = int(order[pos % n])
        bump = 1 if pos >= n else 0
        members.append(idx)
        ks.append(int(wraps[idx]) - bump)
    # Translation vectors are unique up to a common shift; normalize so the
    # most common translation is zero (ties toward the smaller value).
    values, freqs = np.unique(ks, return_counts=True)
    mode = int(values[np.argmax(freqs)])
    ks = [k - mode for k in ks]
    pairs = sorted(zip(members, ks))
    indices = tuple(i for i, _ in pairs)
    translations = tuple(k for _, k in pairs)
    return ClusterReport(indices, translations, float(arc), float(count) / n)


def cluster_from_condensation(
    order: OrderState, theta, lam: float, beta: float
) -> Optional[ClusterReport]:
    """Cluster implied by a concentrated order parameter.

    If either gate
        r >= lam + (1-lam)*cos(beta)
    or
        2*lam + delta/(1-cos(beta)) <= 1 + r
    holds, the set {i : theta_i in (phi-beta, phi+beta) mod 2*pi} is returned;
    it is guaranteed to contain at least ceil(lam*N) members.  Returns ``None``
    when neither gate holds or when ``phi`` is undefined.
    """
    if not (0.0 < lam <= 1.0):
        raise ValueError("lam must lie in (0, 1]")
    if not (0.0 < beta < 0.5 * math.pi):
        raise ValueError("beta must lie in (0, pi/2)")
    if order.phi is None:
        return None
    gate_r = order.r >= lam + (1.0 - lam) * math.cos(beta)
    gate_delta = 2.0 * lam + order.delta / (1.0 - math.cos(beta)) <= 1.0 + order.r
    if not (gate_r or gate_delta):
        return None
    th = np.asarray(theta, dtype=float)
    n = th.size
    d = np.mod(th - order.phi + np.pi, TWO_PI) - np.pi
    members = np.nonzero(np.abs(d) < beta)[0]
    if members.size < math.ceil(lam * n):
        raise RuntimeError(
            "condensation gate held but the implied cluster is too small; "
            "this indicates an inconsistent OrderState/theta pair"
        )
    ks = np.rint((th[members] - order.phi - d[members]) / TWO_PI).astype(int)
    arc = float(d[members].max() - d[members].min())
    return ClusterReport(
        tuple(int(i) for i in members),
        tuple(int(k) for k in ks),
        arc,
        members.size / n,
    )


def arrangement_constant(lam: float, phi1: float) -> float:
    """Upper-bound factor phi1 / (2 sin(phi1/2) (lam cos(phi1) - (1-lam)))
    for tail phase gaps relative to (nu_i - nu_j)/kappa."""
    denom = 2.0 * math.sin(0.5 * phi1) * (lam * math.cos(phi1) - (1.0 - lam))
    if denom <= 0.0:
        raise ValueError("arrangement constant undefined: lam*cos(phi1) <= 1-lam")
    return phi1 / denom


@dataclass(frozen=True)
class PairGap:
    i: int
    j: int
    gap: float
    lower: float
    upper: float


@dataclass(frozen=True)
class ArrangementReport:
    """Tail-averaged pairwise gaps of a cluster against the linear-arrangement
    interval [ (nu_i-nu_j)/kappa, c*(nu_i-nu_j)/kappa ].  Slacks are signed;
    negative means a violation at zero tolerance."""

    c: float
    pairs: tuple[PairGap, ...]
    worst_lower_slack: float
    worst_upper_slack: float

    def ok(self, tol: float) -> bool:
        return self.worst_lower_slack >= -tol and self.worst_upper_slack >= -tol


def arrangement_check(
    record_tail: TrajectoryRecord,
    params: SystemParams,
    cluster: ClusterReport,
    phi1: float,
    lam: float,
) -> ArrangementReport:
    """Check that cluster members order themselves by natural frequency.

    For every member pair with nu_i >= nu_j the tail-averaged translated gap
    theta_i - theta_j is compared against the lower bound (nu_i - nu_j)/kappa
    and the upper bound c*(nu_i - nu_j)/kappa.
    """
    c = arrangement_constant(lam, phi1)
    idx = np.asarray(cluster.indices, dtype=int)
    ks = np.asarray(cluster.translations, dtype=float)
    shifted = record_tail.theta[:, idx] - TWO_PI * ks[None, :]
    mean_theta = shifted.mean(axis=0)
    nu = params.nu[idx]
    pairs = []
    worst_lo = math.inf
    worst_hi = math.inf
    for a in range(idx.size):
        for b in range(a + 1, idx.size):
            hi_, lo_ = (a, b) if nu[a] >= nu[b] else (b, a)
            gap = float(mean_theta[hi_] - mean_theta[lo_])
            lower = (nu[hi_] - nu[lo_]) / params.kappa
            upper = c * lower
            pairs.append(PairGap(int(idx[hi_]), int(idx[lo_]), gap, lower, upper))
            worst_lo = min(worst_lo, gap - lower)
            worst_hi = min(worst_hi, upper - gap)
    return ArrangementReport(c, tuple(pairs), worst_lo, worst_hi)


@dataclass(frozen=True)
class LockTolerances:
    eps_omega: float
    eps_theta: float


def default_lock_tolerances(kappa: float) -> LockTolerances:
    return LockTolerances(1e-4 * max(1.0, kappa), 1e-3)


@dataclass(frozen=True)
class LockReport:
    """Numeric phase-locking verdict over the trailing window.

    ``locked`` holds iff, over the trailing window, max_i |omega_i - nu_c|
    stays below eps_omega and the oscillation of every pairwise phase gap
    stays below eps_theta.  ``t_lock`` is the earliest window start after
    which the criterion never fails.
    """

    locked: bool
    t_lock: Optional[float]
    omega_spread_final: float
    relative_phase_drift_final: float
    eps_omega: float
    eps_theta: float
    window: float


def _rolling_max(a: np.ndarray, length: int) -> np.ndarray:
    """Sliding-window maximum along axis 0 (window ``length``), via the
    two-pass block prefix/suffix scan; O(S*P) total."""
    s = a.shape[0]
    if length == 1:
        return a.copy()
    nb = -(-s // length)
    pad = nb * length - s
    if pad:
        fill = np.full((pad,) + a.shape[1:], -np.inf)
        ap = np.concatenate([a, fill], axis=0)
    else:
        ap = a
    blocks = ap.reshape((nb, length) + a.shape[1:])
    prefix = np.maximum.accumulate(blocks, axis=1).reshape((nb * length,) + a.shape[1:])
    suffix = np.maximum.accumulate(blocks[:, ::-1], axis=1)[:, ::-1]
    suffix = suffix.reshape((nb * length,) + a.shape[1:])
    return np.maximum(suffix[: s - length + 1], prefix[length - 1 : s])


def detect_locking(
    params: SystemParams,
    record: TrajectoryRecord,
    tolerances: Optional[LockTolerances] = None,
    window: float = 10.0,
) -> LockReport:
    """Numeric surrogate for asymptotic phase-locking on a snapshot record.

    Snapshots must be equally spaced and span at least ``window``.
    """
    tol = tolerances or default_lock_tolerances(params.kappa)
    h = _check_uniform_spacing(record.t)
    length = int(round(window / h)) + 1
    s = record.n_snapshots
    if length > s:
        raise ValueError("snapshots must cover at least one lock window")
    freq_dev = np.abs(record.omega - params.nu_c).max(axis=1)
    roll_freq = _rolling_max(freq_dev[:, None], length)[:, 0]
    iu, jv = np.triu_indices(record.n, 1)
    if iu.size:
        gaps = record.theta[:, iu] - record.theta[:, jv]
        osc = (_rolling_max(gaps, length) + _rolling_max(-gaps, length)).max(axis=1)
    else:
        osc = np.zeros(s - length + 1)
    ok = (roll_freq < tol.eps_omega) & (osc < tol.eps_theta)
    locked = bool(ok[-1])
    t_lock = None
    if locked:
        trailing = np.logical_and.accumulate(ok[::-1])
        n_true = int(trailing.sum())
        t_lock = float(record.t[ok.size - n_true])
    return LockReport(
        locked=locked,
        t_lock=t_lock,
        omega_spread_final=float(roll_freq[-1]),
        relative_phase_drift_final=float(osc[-1]),
        eps_omega=tol.eps_omega,
        eps_theta=tol.eps_theta,
        window=window,
    )
