"""Config-driven scenario runner: seeded instance generation, certificate
evaluation, integration with diagnostics series, figure-reproduction sweeps,
certify-then-simulate campaigns, collision censuses, and persistence.

Randomness comes from numpy's PCG64 generator; instance k of a seeded family
uses ``PCG64(seed + k)``, so replays survive across processes and platforms.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .model import (
    TWO_PI,
    PhaseState,
    SystemParams,
    diameter,
)
from .integrate import (
    IntegratorConfig,
    TrajectoryRecord,
    CollisionEvent,
    collision_events_from_record,
    record_trajectory,
    record_trajectory_first_order,
)
from .diagnostics import (
    LockReport,
    LockTolerances,
    arrangement_check,
    ClusterReport,
    detect_locking,
    energy_value,
    find_majority_cluster,
    order_state,
    potential,
)
from .certify import (
    CertificateReport,
    check_first_order,
    check_n3,
    check_partial_locking,
    check_simple,
    corollary_initial_budget,
)

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "SCENARIO_SCHEMA",
    "DiagnosticsSeries",
    "RunRecord",
    "sample_instance",
    "run_scenario",
    "run_instance",
    "SweepResult",
    "figure_sweep",
    "CampaignConfig",
    "CampaignReport",
    "certify_campaign",
    "CensusReport",
    "collision_census",
    "zero_inertia_comparison",
    "save_run_record",
    "save_campaign",
    "worker_count",
]


class ConfigError(ValueError):
    """Invalid scenario or campaign configuration."""


# Stability guard for the explicit scheme: the damping mode has rate 1/m, and
# the classic fourth-order stability interval ends near 2.785/m.
_DT_OVER_M = 2.5


def _effective_dt(dt: float, m: float) -> float:
    if m <= 0.0:
        return dt
    return min(dt, _DT_OVER_M * m)


SCENARIO_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ScenarioConfig",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "N": {"type": "integer", "minimum": 1},
        "m": {"type": "number", "minimum": 0},
        "kappa": {"type": "number", "minimum": 0},
        "D_V": {"type": "number", "minimum": 0},
        "D_Omega0": {"type": "number", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "t_end": {"type": "number", "exclusiveMinimum": 0},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "stride": {"type": "integer", "minimum": 1},
        "window": {"type": "number", "exclusiveMinimum": 0},
        "eps_omega": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "eps_theta": {"type": "number", "exclusiveMinimum": 0},
        "distribution": {"type": "string", "enum": ["uniform"]},
        "certify": {"type": "boolean"},
        "collisions": {"type": "boolean"},
        "cluster_lambda": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "cluster_ell": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 2 * math.pi},
    },
}

_FIELD_TO_KEY = {
    "n": "N",
    "m": "m",
    "kappa": "kappa",
    "d_v": "D_V",
    "d_omega0": "D_Omega0",
    "seed": "seed",
    "t_end": "t_end",
    "dt": "dt",
    "stride": "stride",
    "window": "window",
    "eps_omega": "eps_omega",
    "eps_theta": "eps_theta",
    "distribution": "distribution",
    "certify": "certify",
    "collisions": "collisions",
    "cluster_lambda": "cluster_lambda",
    "cluster_ell": "cluster_ell",
}


@dataclass(frozen=True)
class ScenarioConfig:
    """One seeded scenario: the seed fully determines the instance.

    Phases are drawn uniformly on [0, 2*pi], natural frequencies uniformly on
    [-D_V/2, D_V/2], and initial frequencies uniformly on
    [-D_Omega0/2, D_Omega0/2].
    """

    n: int = 50
    m: float = 1.0
    kappa: float = 1.0
    d_v: float = 1.0
    d_omega0: float = 1.0
    seed: int = 0
    t_end: float = 30.0
    dt: float = 0.01
    stride: int = 10
    window: float = 10.0
    eps_omega: Optional[float] = None
    eps_theta: float = 1e-3
    distribution: str = "uniform"
    certify: bool = True
    collisions: bool = False
    cluster_lambda: float = 0.6
    cluster_ell: float = 1.5

    def __post_init__(self):
        try:
            import jsonschema

            jsonschema.validate(self.to_dict(), SCENARIO_SCHEMA)
        except Exception as exc:  # noqa: BLE001 - rewrap with context
            raise ConfigError(f"invalid scenario config: {exc}") from None

    def to_dict(self) -> dict:
        return {key: getattr(self, attr) for attr, key in _FIELD_TO_KEY.items()}

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        try:
            import jsonschema

            jsonschema.validate(doc, SCENARIO_SCHEMA)
        except Exception as exc:  # noqa: BLE001
            raise ConfigError(f"invalid scenario config: {exc}") from None
        kwargs = {attr: doc[key] for attr, key in _FIELD_TO_KEY.items() if key in doc}
        return cls(**kwargs)

    def lock_tolerances(self) -> LockTolerances:
        eps_w = self.eps_omega if self.eps_omega is not None else 1e-4 * max(1.0, self.kappa)
        return LockTolerances(eps_w, self.eps_theta)


def _unit_draws(n: int, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unit-scale draws (phases, nu, omega) behind every seeded instance.

    Draw order is fixed: phases, then natural frequencies, then initial
    frequencies; sweeps reuse the same unit draws and rescale.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    u_theta = rng.uniform(0.0, TWO_PI, n)
    u_nu = rng.uniform(-0.5, 0.5, n)
    u_omega = rng.uniform(-0.5, 0.5, n)
    return u_theta, u_nu, u_omega


def _instance_from_draws(
    config: ScenarioConfig, draws: tuple[np.ndarray, np.ndarray, np.ndarray]
) -> tuple[SystemParams, PhaseState]:
    u_theta, u_nu, u_omega = draws
    params = SystemParams(config.m, config.kappa, config.d_v * u_nu)
    state0 = PhaseState(0.0, u_theta, config.d_omega0 * u_omega)
    return params, state0


def sample_instance(config: ScenarioConfig) -> tuple[SystemParams, PhaseState]:
    """Deterministic instance for the config's seed."""
    return _instance_from_draws(config, _unit_draws(config.n, config.seed))


@dataclass(frozen=True)
class DiagnosticsSeries:
    """Per-snapshot diagnostic columns.  Serialized CSV columns are
    t, R, phi, Delta, D_theta, D_omega, P, E, cluster_fraction, cluster_arc."""

    t: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    delta: np.ndarray
    d_theta: np.ndarray
    d_omega: np.ndarray
    p: np.ndarray
    e: np.ndarray
    cluster_fraction: np.ndarray
    cluster_arc: np.ndarray

    COLUMNS = ("t", "R", "phi", "Delta", "D_theta", "D_omega", "P", "E",
               "cluster_fraction", "cluster_arc")

    def as_columns(self) -> tuple[np.ndarray, ...]:
        return (self.t, self.r, self.phi, self.delta, self.d_theta,
                self.d_omega, self.p, self.e, self.cluster_fraction, self.cluster_arc)

    def value_at(self, column: str, t: float) -> float:
        """Column value at the snapshot closest to time t."""
        k = int(np.argmin(np.abs(self.t - t)))
        data = dict(zip(self.COLUMNS, self.as_columns()))
        return float(data[column][k])

    def to_csv(self, path) -> None:
        cols = self.as_columns()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.COLUMNS)
            for k in range(self.t.size):
                writer.writerow([repr(float(c[k])) for c in cols])


def compute_series(
    params: SystemParams,
    record: TrajectoryRecord,
    cluster_lambda: float,
    cluster_ell: float,
) -> DiagnosticsSeries:
    """Evaluate the diagnostic columns on every snapshot of a record.

    The centroid phase column is unwrapped by continuity across snapshots,
    seeded at the first snapshot.
    """
    s = record.n_snapshots
    z = np.exp(1j * record.theta).mean(axis=1)
    r = np.abs(z)
    phi = np.full(s, np.nan)
    delta = np.empty(s)
    defined = r >= 1e-12
    phi[defined] = np.angle(z[defined])
    prev = None
    for k in range(s):
        if defined[k]:
            if prev is not None:
                phi[k] += TWO_PI * round((prev - phi[k]) / TWO_PI)
            prev = phi[k]
            delta[k] = np.mean(np.sin(record.theta[k] - phi[k]) ** 2)
        else:
            delta[k] = order_state(record.theta[k]).delta
    d_theta = record.theta.max(axis=1) - record.theta.min(axis=1)
    d_omega = record.omega.max(axis=1) - record.omega.min(axis=1)
    p = np.array([potential(params, record.theta[k]) for k in range(s)])
    e = np.array([energy_value(params, record.theta[k], record.omega[k]) for k in range(s)])
    frac = np.zeros(s)
    arc = np.full(s, np.nan)
    for k in range(s):
        rep = find_majority_cluster(record.theta[k], cluster_lambda, cluster_ell)
        if rep is not None:
            frac[k] = rep.fraction
            arc[k] = rep.arc_diameter
    return DiagnosticsSeries(record.t.copy(), r, phi, delta, d_theta, d_omega, p, e, frac, arc)


@dataclass(frozen=True)
class RunRecord:
    """Everything one scenario run produced.  Byte-identical reproducible
    from (config, code version); provenance carries the code version only."""

    config: ScenarioConfig
    params: SystemParams
    state0: PhaseState
    r0: float
    d_omega0: float
    effective_dt: float
    certificates: dict
    series: DiagnosticsSeries
    lock: Optional[LockReport]
    collisions: Optional[tuple[CollisionEvent, ...]]
    final_state: PhaseState
    provenance: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        lock = None
        if self.lock is not None:
            lock = {
                "locked": self.lock.locked,
                "t_lock": self.lock.t_lock,
                "omega_spread_final": self.lock.omega_spread_final,
                "relative_phase_drift_final": self.lock.relative_phase_drift_final,
                "eps_omega": self.lock.eps_omega,
                "eps_theta": self.lock.eps_theta,
                "window": self.lock.window,
            }
        collisions = None
        if self.collisions is not None:
            collisions = [
                {"i": ev.i, "j": ev.j, "t_star": ev.t_star, "branch": ev.branch}
                for ev in self.collisions
            ]
        return {
            "config": self.config.to_dict(),
            "instance": {
                "nu": self.params.nu.tolist(),
                "theta0": self.state0.theta.tolist(),
                "omega0": self.state0.omega.tolist(),
            },
            "R0": self.r0,
            "D_Omega0_actual": self.d_omega0,
            "effective_dt": self.effective_dt,
            "certificates": {k: v.to_json_dict() for k, v in self.certificates.items()},
            "lock": lock,
            "collisions": collisions,
            "final": {
                "t": self.final_state.t,
                "theta": self.final_state.theta.tolist(),
                "omega": self.final_state.omega.tolist(),
            },
            "provenance": dict(self.provenance),
        }


def run_instance(
    config: ScenarioConfig, params: SystemParams, state0: PhaseState
) -> RunRecord:
    """Certify, integrate, and attach diagnostics for an explicit instance."""
    if config.certify and config.kappa <= 0.0:
        raise ConfigError("certification requested but kappa is zero")
    r0 = order_state(state0.theta).r
    d_om0 = diameter(state0.omega)
    certificates: dict[str, CertificateReport] = {}
    if config.certify:
        if params.m > 0.0:
            certificates["simple"] = check_simple(params, r0, d_om0)
            if params.n == 3:
                certificates["n3"] = check_n3(params)
        else:
            certificates["first_order"] = check_first_order(params, r0)

    dt_eff = _effective_dt(config.dt, params.m)
    collisions: Optional[tuple[CollisionEvent, ...]] = None
    if params.m > 0.0:
        if config.collisions:
            dense_cfg = IntegratorConfig(
                dt=dt_eff, t_end=config.t_end, observer_stride=1, coupling="mean_field"
            )
            dense = record_trajectory(params, state0, dense_cfg)
            collisions = tuple(collision_events_from_record(params, dense, dense_cfg))
            record = dense.subsample(config.stride)
        else:
            cfg = IntegratorConfig(
                dt=dt_eff,
                t_end=config.t_end,
                observer_stride=config.stride,
                coupling="mean_field",
            )
            record = record_trajectory(params, state0, cfg)
    else:
        cfg = IntegratorConfig(
            dt=dt_eff,
            t_end=config.t_end,
            observer_stride=config.stride,
            coupling="mean_field",
        )
        record = record_trajectory_first_order(params, state0.theta, cfg)

    series = compute_series(params, record, config.cluster_lambda, config.cluster_ell)
    lock = None
    if record.t[-1] - record.t[0] >= config.window:
        uniform = record
        if uniform.t.size >= 3 and not np.allclose(
            np.diff(uniform.t), np.diff(uniform.t)[0], rtol=1e-9, atol=1e-12
        ):
            uniform = TrajectoryRecord(record.t[:-1], record.theta[:-1], record.omega[:-1])
        lock = detect_locking(params, uniform, config.lock_tolerances(), config.window)
    final = record.state(record.n_snapshots - 1)
    return RunRecord(
        config=config,
        params=params,
        state0=state0,
        r0=r0,
        d_omega0=d_om0,
        effective_dt=dt_eff,
        certificates=certificates,
        series=series,
        lock=lock,
        collisions=collisions,
        final_state=final,
        provenance={"code_version": __version__},
    )


def run_scenario(config: ScenarioConfig) -> RunRecord:
    """Generate the seeded instance and run it."""
    params, state0 = sample_instance(config)
    return run_instance(config, params, state0)


# ---------------------------------------------------------------------------
# Worker pool plumbing
# ---------------------------------------------------------------------------

def worker_count(explicit: Optional[int] = None) -> int:
    """Worker cap: explicit argument, else KURAMOTO_LOCK_THREADS, else CPUs."""
    if explicit is not None:
        return max(1, int(explicit))
    env = os.environ.get("KURAMOTO_LOCK_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _map_tasks(fn: Callable, tasks: Sequence, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


# ---------------------------------------------------------------------------
# Figure sweeps
# ---------------------------------------------------------------------------

_SWEEP_AXES = ("Dv_over_kappa", "m_kappa", "DOmega_over_kappa")


def _sweep_config(base: ScenarioConfig, axis: str, value: float) -> ScenarioConfig:
    if axis == "Dv_over_kappa":
        return dataclasses.replace(base, d_v=value * base.kappa)
    if axis == "m_kappa":
        return dataclasses.replace(base, m=value / base.kappa)
    if axis == "DOmega_over_kappa":
        return dataclasses.replace(base, d_omega0=value * base.kappa)
    raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {_SWEEP_AXES}")


def _sweep_task(args: tuple) -> dict:
    base_doc, axis, value, fresh, index = args
    base = ScenarioConfig.from_dict(base_doc)
    config = _sweep_config(base, axis, float(value))
    seed = base.seed + index if fresh else base.seed
    draws = _unit_draws(config.n, seed)
    params, state0 = _instance_from_draws(config, draws)
    record = run_instance(config, params, state0)
    row = {
        "value": float(value),
        "R_end": record.series.value_at("R", record.series.t[-1]),
        "Delta_end": record.series.value_at("Delta", record.series.t[-1]),
        "locked": bool(record.lock.locked) if record.lock else False,
        "t_lock": record.lock.t_lock if record.lock and record.lock.locked else None,
    }
    if record.series.t[-1] >= 30.0 - 1e-9:
        r30 = record.series.value_at("R", 30.0)
        var_nu = params.nu_var
        row["R_30"] = r30
        row["ratio_one_minus_R30"] = (
            (1.0 - r30) * config.kappa**2 / var_nu if var_nu > 0 else math.nan
        )
    else:
        row["R_30"] = math.nan
        row["ratio_one_minus_R30"] = math.nan
    return {"row": row, "record": record}


@dataclass
class SweepResult:
    axis: str
    values: tuple[float, ...]
    rows: list[dict]
    records: list[RunRecord]

    def to_csv(self, path) -> None:
        cols = ["value", "R_end", "Delta_end", "locked", "t_lock", "R_30",
                "ratio_one_minus_R30"]
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=cols)
            writer.writeheader()
            for row in self.rows:
                writer.writerow(row)


def figure_sweep(
    axis: str,
    values: Sequence[float],
    base_config: ScenarioConfig,
    fresh_samples: bool = False,
    workers: Optional[int] = None,
) -> SweepResult:
    """One run per axis value with a shared frozen sample.

    By default the unit draws behind phases/frequencies are made once from the
    base seed and rescaled per value; ``fresh_samples`` draws per-value
    substreams instead.
    """
    values = [float(v) for v in values]
    if any(not (math.isfinite(v) and v > 0) for v in values):
        raise ConfigError("sweep values must be positive and finite")
    tasks = [
        (base_config.to_dict(), axis, v, fresh_samples, k) for k, v in enumerate(values)
    ]
    results = _map_tasks(_sweep_task, tasks, worker_count(workers))
    return SweepResult(
        axis=axis,
        values=tuple(values),
        rows=[res["row"] for res in results],
        records=[res["record"] for res in results],
    )


# ---------------------------------------------------------------------------
# Certify-then-simulate campaigns
# ---------------------------------------------------------------------------

CAMPAIGN_KINDS = ("simple", "n3", "first_order", "partial")


@dataclass(frozen=True)
class CampaignConfig:
    """Campaign over seeded instances of one certificate family.

    For ``partial`` campaigns, ``lam``/``ell``/``eta`` configure the cluster
    certificate and ``n`` the ensemble size.
    """

    which: str
    n_instances: int = 20
    seed: int = 0
    n: int = 20
    kappa: float = 1.0
    t_end: float = 200.0
    dt: float = 0.01
    stride: int = 50
    window: float = 10.0
    eps_omega: Optional[float] = None
    eps_theta: float = 1e-3
    lam: float = 0.7
    ell: float = 1.0
    eta: float = 2.0
    max_attempts_factor: int = 200

    def __post_init__(self):
        if self.which not in CAMPAIGN_KINDS:
            raise ConfigError(f"unknown campaign kind {self.which!r}")
        if self.n_instances < 1 or self.n < 1:
            raise ConfigError("n_instances and n must be >= 1")

    def lock_tolerances(self) -> LockTolerances:
        eps_w = self.eps_omega if self.eps_omega is not None else 1e-4 * max(1.0, self.kappa)
        return LockTolerances(eps_w, self.eps_theta)


@dataclass(frozen=True)
class PartialSpec:
    """Construction data accompanying a partial-locking campaign instance."""

    subset_a: tuple[int, ...]
    subset_b: tuple[int, ...]
    lam: float
    ell: float
    eta: float
    t1: float


def _sample_simple(cc: CampaignConfig, rng: np.random.Generator):
    """Instance inside the simple-certificate region.

    Phases are drawn on a sub-arc so the initial order parameter is bounded
    away from zero; the inertia ratio is kept away from zero so the default
    step size stays well inside the stability region.
    """
    width = rng.uniform(1.0, math.pi)
    theta0 = rng.uniform(-0.5 * width, 0.5 * width, cc.n)
    r0 = float(abs(np.exp(1j * theta0).mean()))
    x = rng.uniform(0.05, 1.0) * 0.5
    y = rng.uniform(0.55, 1.0) * 0.015
    z = rng.uniform(0.05, 1.0) * 0.12
    r0sq = r0 * r0
    d_v = x * cc.kappa * r0sq
    m = y * r0sq / cc.kappa
    d_om = z * cc.kappa * r0sq
    nu = rng.uniform(-0.5 * d_v, 0.5 * d_v, cc.n)
    omega0 = rng.uniform(-0.5 * d_om, 0.5 * d_om, cc.n)
    params = SystemParams(m, cc.kappa, nu)
    state0 = PhaseState(0.0, theta0, omega0)
    report = check_simple(params, r0, diameter(omega0))
    return params, state0, report, None


def _sample_n3(cc: CampaignConfig, rng: np.random.Generator):
    """N=3 instance inside the all-initial-data certificate, with adversarial
    initial phases (uniform, near-bipolar, near-splay) and large initial
    frequency spreads."""
    from .certify import n3_threshold

    kappa = cc.kappa
    threshold = n3_threshold()
    while True:
        mk = rng.uniform(0.004, 0.05)
        dv_over_k = rng.uniform(0.0, 0.2)
        m = mk / kappa
        d_v = dv_over_k * kappa
        lhs = m * d_v + 2.0 * m * kappa + d_v / (2.0 * kappa)
        if lhs < 0.97 * threshold:
            break
    mode = rng.integers(0, 3)
    if mode == 0:
        theta0 = rng.uniform(0.0, TWO_PI, 3)
    elif mode == 1:
        eps = rng.uniform(1e-3, 0.1)
        theta0 = np.array([0.0, math.pi + eps, rng.uniform(-0.3, 0.3)])
    else:
        theta0 = np.array([0.0, TWO_PI / 3.0, 2.0 * TWO_PI / 3.0]) + rng.uniform(
            -0.2, 0.2, 3
        )
    d_om = rng.uniform(0.0, 5.0) * kappa
    omega0 = rng.uniform(-0.5 * d_om, 0.5 * d_om, 3)
    nu = rng.uniform(-0.5 * d_v, 0.5 * d_v, 3)
    params = SystemParams(m, kappa, nu)
    state0 = PhaseState(0.0, theta0, omega0)
    return params, state0, check_n3(params), None


def _sample_first_order(cc: CampaignConfig, rng: np.random.Generator):
    width = rng.uniform(0.8, TWO_PI)
    theta0 = rng.uniform(-0.5 * width, 0.5 * width, cc.n)
    r0 = float(abs(np.exp(1j * theta0).mean()))
    if r0 < 1e-3:
        theta0 = rng.uniform(-0.4, 0.4, cc.n)
        r0 = float(abs(np.exp(1j * theta0).mean()))
    margin = rng.uniform(0.2, 0.95)
    d_v = margin * cc.kappa * r0 * r0 / 1.6
    nu = rng.uniform(-0.5 * d_v, 0.5 * d_v, cc.n)
    params = SystemParams(0.0, cc.kappa, nu)
    state0 = PhaseState(0.0, theta0, np.zeros(cc.n))
    return params, state0, check_first_order(params, r0), None


def _sample_partial(cc: CampaignConfig, rng: np.random.Generator):
    """Constructed ensemble: a tight majority cluster plus stragglers on the
    far side, with budgets sized so the partial-locking certificate and its
    initial-arc gate both pass."""
    n = cc.n
    a_count = math.ceil(cc.lam * n)
    subset_a = tuple(range(a_count))
    subset_b = tuple(range(n))
    kappa = cc.kappa
    for _ in range(200):
        mk = rng.uniform(0.005, 0.02)
        m = mk / kappa
        d_v = rng.uniform(0.02, 0.1) * kappa
        nu = rng.uniform(-0.5 * d_v, 0.5 * d_v, n)
        theta_a = rng.uniform(-0.15, 0.15, a_count)
        theta_out = math.pi + rng.uniform(-0.5, 0.5, n - a_count)
        theta0 = np.concatenate([theta_a, theta_out])
        omega0 = rng.uniform(-0.05, 0.05, n) * kappa
        params = SystemParams(m, kappa, nu)
        state0 = PhaseState(0.0, theta0, omega0)
        d_om_a = diameter(omega0, subset_a)
        d_om_b = diameter(omega0)
        t1 = cc.eta * m
        report = check_partial_locking(
            params, subset_a, subset_b, d_om_a, d_om_b, cc.lam, cc.ell, cc.eta, t1
        )
        budget = corollary_initial_budget(params, subset_a, d_om_a, cc.ell, cc.eta)
        if report.passed and diameter(theta0, subset_a) <= budget:
            spec = PartialSpec(subset_a, subset_b, cc.lam, cc.ell, cc.eta, t1)
            return params, state0, report, spec
    raise ConfigError("could not construct a certified partial-locking instance")


_SAMPLERS = {
    "simple": _sample_simple,
    "n3": _sample_n3,
    "first_order": _sample_first_order,
    "partial": _sample_partial,
}


def _campaign_instance(cc: CampaignConfig, attempt: int):
    rng = np.random.Generator(np.random.PCG64(cc.seed + attempt))
    return _SAMPLERS[cc.which](cc, rng)


def _campaign_scenario(cc: CampaignConfig, params: SystemParams) -> ScenarioConfig:
    return ScenarioConfig(
        n=cc.n if cc.which != "n3" else 3,
        m=params.m,
        kappa=cc.kappa,
        d_v=1.0,
        d_omega0=1.0,
        seed=0,
        t_end=cc.t_end,
        dt=cc.dt,
        stride=cc.stride,
        window=cc.window,
        eps_omega=cc.eps_omega,
        eps_theta=cc.eps_theta,
        certify=False,
        collisions=(cc.which == "n3"),
    )


def _campaign_task(args: tuple) -> dict:
    cc_doc, attempt, outdir = args
    cc = CampaignConfig(**cc_doc)
    params, state0, report, spec = _campaign_instance(cc, attempt)
    result = {
        "index": attempt,
        "seed": cc.seed + attempt,
        "certified": report.passed,
    }
    if cc.which == "partial":
        result.update(_verify_partial(cc, params, state0, report, spec))
        return result
    config = _campaign_scenario(cc, params)
    record = run_instance(config, params, state0)
    if outdir is not None:
        out = Path(outdir)
        with open(out / "records" / f"run_{attempt:05d}.json", "w") as fh:
            json.dump(record.to_json_dict(), fh)
            fh.write("\n")
        record.series.to_csv(out / "series" / f"run_{attempt:05d}.csv")
    locked = bool(record.lock and record.lock.locked)
    result.update(
        {
            "locked": locked,
            "t_lock": record.lock.t_lock if record.lock else None,
            "ok": locked,
            "reason": "" if locked else "no lock by t_end",
        }
    )
    if cc.which == "n3":
        events = record.collisions or ()
        tail_ok = True
        tail_start = math.nan
        if locked and params.m * params.kappa <= 0.25:
            tail_start = 0.5 * (record.lock.t_lock + cc.t_end)
            tail_ok = all(ev.t_star < tail_start for ev in events)
        result.update(
            {
                "collisions": len(events),
                "tail_start": tail_start,
                "tail_ok": tail_ok,
                "ok": locked and tail_ok,
                "reason": result["reason"] or ("" if tail_ok else "collision in lock tail"),
            }
        )
    return result


def _verify_partial(
    cc: CampaignConfig,
    params: SystemParams,
    state0: PhaseState,
    report: CertificateReport,
    spec: PartialSpec,
    slack: float = 1e-3,
    arc_slack: float = 1e-6,
) -> dict:
    """Simulate a certified partial-locking instance and check its three
    predictions: arc persistence from t1, the tail diameter bound, and the
    pairwise arrangement interval."""
    preds = report.details["predictions"]
    dt_eff = _effective_dt(cc.dt, params.m)
    cfg = IntegratorConfig(
        dt=dt_eff, t_end=cc.t_end, observer_stride=cc.stride, coupling="mean_field"
    )
    record = record_trajectory(params, state0, cfg)
    idx = np.asarray(spec.subset_a, dtype=int)
    sub = record.theta[:, idx]
    diam = sub.max(axis=1) - sub.min(axis=1)
    after = record.t >= spec.t1 - 1e-12
    persist_max = float(diam[after].max())
    persistence_ok = persist_max <= spec.ell + arc_slack
    tail = record.tail(cc.window)
    tail_diam = float(
        (tail.theta[:, idx].max(axis=1) - tail.theta[:, idx].min(axis=1)).max()
    )
    tail_bound = preds["tail_diameter_bound"]
    tail_ok = tail_diam <= tail_bound + slack
    cluster = ClusterReport(
        indices=spec.subset_a,
        translations=tuple(0 for _ in spec.subset_a),
        arc_diameter=float(diam[-1]),
        fraction=len(spec.subset_a) / params.n,
    )
    arrangement = arrangement_check(tail, params, cluster, tail_bound, spec.lam)
    arrangement_ok = bool(arrangement.ok(slack))
    persistence_ok = bool(persistence_ok)
    tail_ok = bool(tail_ok)
    ok = persistence_ok and tail_ok and arrangement_ok
    reasons = []
    if not persistence_ok:
        reasons.append(f"arc {persist_max:.4f} exceeded {spec.ell}")
    if not tail_ok:
        reasons.append(f"tail diameter {tail_diam:.4f} above bound {tail_bound:.4f}")
    if not arrangement_ok:
        reasons.append("arrangement interval violated")
    return {
        "ok": ok,
        "reason": "; ".join(reasons),
        "persist_max": persist_max,
        "tail_diameter": tail_diam,
        "tail_bound": tail_bound,
        "arrangement_c": arrangement.c,
        "arrangement_lower_slack": arrangement.worst_lower_slack,
        "arrangement_upper_slack": arrangement.worst_upper_slack,
    }


@dataclass
class CampaignReport:
    which: str
    n_instances: int
    results: list[dict]
    defects: list[dict]
    all_ok: bool

    def to_json_dict(self) -> dict:
        return {
            "which": self.which,
            "n_instances": self.n_instances,
            "results": self.results,
            "defects": self.defects,
            "all_ok": self.all_ok,
        }


def certify_campaign(
    cc: CampaignConfig,
    workers: Optional[int] = None,
    outdir: Optional[Path] = None,
) -> CampaignReport:
    """Sample certified instances, simulate each, and assert the certified
    prediction.  Any certified-but-failed instance is reported as a defect
    with its reproduction seed."""
    kept: list[int] = []
    attempt = 0
    limit = cc.n_instances * cc.max_attempts_factor
    while len(kept) < cc.n_instances:
        if attempt >= limit:
            raise ConfigError(
                f"sampler produced only {len(kept)} certified instances in {limit} attempts"
            )
        _, _, report, _ = _campaign_instance(cc, attempt)
        if report.passed:
            kept.append(attempt)
        attempt += 1
    out_str = None
    if outdir is not None:
        out = Path(outdir)
        (out / "records").mkdir(parents=True, exist_ok=True)
        (out / "series").mkdir(parents=True, exist_ok=True)
        out_str = str(out)
    cc_doc = dataclasses.asdict(cc)
    tasks = [(cc_doc, k, out_str) for k in kept]
    results = _map_tasks(_campaign_task, tasks, worker_count(workers))
    results.sort(key=lambda row: row["index"])
    defects = [row for row in results if not row["ok"]]
    report = CampaignReport(cc.which, cc.n_instances, results, defects, not defects)
    if outdir is not None:
        save_campaign(report, cc, Path(outdir))
    return report


# ---------------------------------------------------------------------------
# Collision census
# ---------------------------------------------------------------------------

@dataclass
class CensusReport:
    """Per-pair collision counts over a run, with the no-late-collision check
    applied when the inertia ratio is small and the run locked."""

    counts: dict
    events: tuple[CollisionEvent, ...]
    total: int
    m_kappa: float
    locked: bool
    t_lock: Optional[float]
    tail_start: Optional[float]
    tail_violations: tuple[CollisionEvent, ...]
    tail_ok: bool

    def to_json_dict(self) -> dict:
        return {
            "counts": {f"{i}-{j}": c for (i, j), c in sorted(self.counts.items())},
            "total": self.total,
            "m_kappa": self.m_kappa,
            "locked": self.locked,
            "t_lock": self.t_lock,
            "tail_start": self.tail_start,
            "tail_violations": [
                {"i": ev.i, "j": ev.j, "t_star": ev.t_star, "branch": ev.branch}
                for ev in self.tail_violations
            ],
            "tail_ok": self.tail_ok,
        }


def collision_census(config: ScenarioConfig) -> CensusReport:
    """Count per-pair collisions over the run.

    When m*kappa <= 1/4 and the run locked, no collision may occur in the
    trailing half of the locked span [t_lock, t_end]; violations are listed.
    """
    record = run_scenario(dataclasses.replace(config, collisions=True))
    events = record.collisions or ()
    counts: dict[tuple[int, int], int] = {}
    for ev in events:
        counts[(ev.i, ev.j)] = counts.get((ev.i, ev.j), 0) + 1
    locked = bool(record.lock and record.lock.locked)
    t_lock = record.lock.t_lock if record.lock else None
    tail_start = None
    violations: tuple[CollisionEvent, ...] = ()
    tail_ok = True
    if locked and record.params.m * record.params.kappa <= 0.25:
        tail_start = 0.5 * (t_lock + config.t_end)
        violations = tuple(ev for ev in events if ev.t_star >= tail_start)
        tail_ok = not violations
    return CensusReport(
        counts=counts,
        events=events,
        total=len(events),
        m_kappa=record.params.m * record.params.kappa,
        locked=locked,
        t_lock=t_lock,
        tail_start=tail_start,
        tail_violations=violations,
        tail_ok=tail_ok,
    )


# ---------------------------------------------------------------------------
# Zero-inertia comparison (no convergence rate asserted)
# ---------------------------------------------------------------------------

def zero_inertia_comparison(
    config: ScenarioConfig, m_values: Sequence[float], t_skip: float = 1.0
) -> list[dict]:
    """Sup-norm gap between inertial runs and the zero-inertia run, after
    skipping the initial layer.  Reports the gaps; no rate is claimed."""
    params0, state0 = sample_instance(dataclasses.replace(config, m=0.0))
    cfg = IntegratorConfig(
        dt=config.dt, t_end=config.t_end, observer_stride=config.stride, coupling="mean_field"
    )
    base = record_trajectory_first_order(params0, state0.theta, cfg)
    rows = []
    for m in m_values:
        params_m = SystemParams(m, params0.kappa, params0.nu)
        dt_eff = _effective_dt(config.dt, m)
        cfg_m = IntegratorConfig(
            dt=dt_eff, t_end=config.t_end, observer_stride=1, coupling="mean_field"
        )
        rec = record_trajectory(params_m, state0, cfg_m)
        # Compare on the coarse snapshot grid of the zero-inertia run.
        gaps = []
        for k, t in enumerate(base.t):
            if t < t_skip:
                continue
            kk = int(np.argmin(np.abs(rec.t - t)))
            gaps.append(float(np.abs(rec.theta[kk] - base.theta[k]).max()))
        rows.append({"m": float(m), "sup_gap": max(gaps) if gaps else math.nan})
    return rows


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def save_run_record(record: RunRecord, outdir, name: str = "run") -> None:
    """Write ``<name>.json`` (record without the series) and
    ``<name>_series.csv`` (diagnostic columns) into ``outdir``."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"{name}.json", "w") as fh:
        json.dump(record.to_json_dict(), fh, indent=2)
        fh.write("\n")
    record.series.to_csv(out / f"{name}_series.csv")


def save_campaign(report: CampaignReport, cc: CampaignConfig, outdir: Path) -> None:
    """Campaign layout: config.json, summary.csv, campaign.json."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.json", "w") as fh:
        json.dump(dataclasses.asdict(cc), fh, indent=2)
        fh.write("\n")
    with open(out / "campaign.json", "w") as fh:
        json.dump(report.to_json_dict(), fh, indent=2)
        fh.write("\n")
    keys: list[str] = []
    for row in report.results:
        for key in row:
            if key not in keys:
                keys.append(key)
    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys)
        writer.writeheader()
        for row in report.results:
            writer.writerow(row)
