"""Experiment drivers: charging traces, scaling sweeps, and validation scans.

Every sweep row records the full parameter snapshot it was produced from,
so any row can be re-run standalone and reproduced exactly. Rows are
ordered by the swept variable; with ``workers > 1`` rows are computed in
separate processes but returned in sweep order regardless of completion
order.
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ._version import __version__
from .errors import DegenerateTraceError, ValidationError
from .hilbert import build_basis
from .model import ChargingProtocol, ModelParams, build_hq, build_total, initial_state
from .observables import (
    ChargingSummary,
    ChargingTrace,
    charging_power,
    energy_expectation,
    find_maxima,
)
from .propagate import DensePropagator, PropagatorConfig, TimeGrid, evolve_trace, propagate_to


def _prepare(params: ModelParams, grid: TimeGrid, theta: int):
    basis = build_basis(params)
    h = build_total(basis, ChargingProtocol(theta=theta, duration=grid.t_max))
    hq = build_hq(basis)
    psi0 = initial_state(basis)
    return h, hq, psi0


def _energy_samples(h, hq, psi0, grid, cfg) -> np.ndarray:
    e0 = energy_expectation(psi0, hq)
    energies = np.empty(grid.samples)
    energies[0] = 0.0
    for k, (_, psi) in enumerate(evolve_trace(h, psi0, grid, cfg)):
        if k > 0:
            energies[k] = energy_expectation(psi, hq) - e0
    return energies


def run_trace(
    params: ModelParams,
    grid: TimeGrid,
    cfg: PropagatorConfig | None = None,
    theta: int = 1,
) -> ChargingTrace:
    """Full E(t), P(t) trace for one parameter point (states are streamed)."""
    if cfg is None:
        cfg = PropagatorConfig()
    h, hq, psi0 = _prepare(params, grid, theta)
    energies = _energy_samples(h, hq, psi0, grid, cfg)
    return ChargingTrace(params, grid, energies, charging_power(energies, grid.times))


def charging_summary(
    params: ModelParams,
    grid: TimeGrid,
    cfg: PropagatorConfig | None = None,
    refine: bool = True,
    theta: int = 1,
) -> ChargingSummary:
    """Trace one parameter point and extract (E_max, t_E, P_max, t_P)."""
    if cfg is None:
        cfg = PropagatorConfig()
    h, hq, psi0 = _prepare(params, grid, theta)
    energies = _energy_samples(h, hq, psi0, grid, cfg)
    trace = ChargingTrace(params, grid, energies, charging_power(energies, grid.times))

    energy_at = None
    if refine:
        e0 = energy_expectation(psi0, hq)
        if cfg.method == "dense":
            prop = DensePropagator(h)

            def energy_at(t: float) -> float:
                return energy_expectation(prop.apply(psi0, t), hq) - e0

        else:

            def energy_at(t: float) -> float:
                return energy_expectation(propagate_to(h, psi0, t, cfg), hq) - e0

    return find_maxima(trace, refine=refine, energy_at=energy_at)


@dataclass(frozen=True)
class SweepRow:
    """One sweep point: the exact parameters used and the extracted maxima."""

    params: ModelParams
    e_max: float
    t_e: float
    p_max: float
    t_p: float
    e_boundary: bool
    p_boundary: bool


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    grid: TimeGrid
    propagator: PropagatorConfig
    meta: dict


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares line on (log N, log P_max)."""

    exponent: float
    intercept: float
    max_residual: float
    n_values: tuple[int, ...]


def _summary_job(args) -> ChargingSummary:
    params, grid, cfg, refine = args
    return charging_summary(params, grid, cfg, refine=refine)


def _run_summaries(param_list, grid, cfg, refine, workers) -> list[ChargingSummary]:
    jobs = [(p, grid, cfg, refine) for p in param_list]
    if workers <= 1:
        return [_summary_job(j) for j in jobs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_summary_job, jobs))


def _rows_from(param_list, summaries) -> tuple[SweepRow, ...]:
    return tuple(
        SweepRow(p, s.e_max, s.t_e, s.p_max, s.t_p, s.e_boundary, s.p_boundary)
        for p, s in zip(param_list, summaries)
    )


def split_atoms(n_total: int, rule: str) -> tuple[int, int]:
    """Resolve a split rule to (n_a, n_b); each cavity needs >= 2 atoms."""
    if n_total < 4:
        raise ValidationError(
            f"collective charging needs at least two atoms per cavity, got N={n_total}"
        )
    if rule == "symmetric":
        if n_total % 2:
            raise ValidationError(f"symmetric split needs an even atom number, got N={n_total}")
        return n_total // 2, n_total // 2
    if rule == "most_asymmetric":
        return 2, n_total - 2
    if rule.startswith("fixed:"):
        try:
            k = int(rule.split(":", 1)[1])
        except ValueError:
            raise ValidationError(f"malformed split rule {rule!r}; expected fixed:<k>") from None
        if k < 2 or n_total - k < 2:
            raise ValidationError(
                f"fixed split k={k} leaves fewer than two atoms in a cavity for N={n_total}"
            )
        return k, n_total - k
    raise ValidationError(f"unknown split rule {rule!r}")


def sweep_total_atoms(
    n_list: Sequence[int],
    split: str,
    template: ModelParams,
    grid: TimeGrid,
    cfg: PropagatorConfig | None = None,
    workers: int = 1,
    refine: bool = True,
) -> SweepResult:
    """Charging maxima versus total atom number under a fixed split rule."""
    if cfg is None:
        cfg = PropagatorConfig()
    n_sorted = sorted(n_list)
    if len(n_sorted) != len(set(n_sorted)):
        raise ValidationError(f"duplicate atom numbers in sweep list {list(n_list)}")
    param_list = [
        replace(template, n_a=na, n_b=nb)
        for na, nb in (split_atoms(n, split) for n in n_sorted)
    ]
    summaries = _run_summaries(param_list, grid, cfg, refine, workers)
    meta = {"variable": "n_total", "split": split, "version": __version__}
    return SweepResult(_rows_from(param_list, summaries), grid, cfg, meta)


def fit_power_law(sweep: SweepResult) -> ScalingFit:
    """Fit P_max proportional to N^alpha on the sweep's rows."""
    ns = [row.params.n_total for row in sweep.rows]
    ps = [row.p_max for row in sweep.rows]
    if len(ns) < 4:
        raise ValidationError(f"power-law fit needs >= 4 rows, got {len(ns)}")
    if len(set(ns)) < 2:
        raise ValidationError("degenerate fit: all atom numbers equal")
    if any(p <= 0 for p in ps):
        raise ValidationError("power-law fit needs all p_max > 0")
    log_n = np.log(np.asarray(ns, dtype=float))
    log_p = np.log(np.asarray(ps, dtype=float))
    exponent, intercept = np.polyfit(log_n, log_p, 1)
    residual = float(np.max(np.abs(log_p - (exponent * log_n + intercept))))
    return ScalingFit(float(exponent), float(intercept), residual, tuple(ns))


def sweep_split(
    n_total: int,
    template: ModelParams,
    grid: TimeGrid,
    cfg: PropagatorConfig | None = None,
    workers: int = 1,
    refine: bool = True,
) -> SweepResult:
    """Charging maxima versus n_a at fixed total atom number."""
    if cfg is None:
        cfg = PropagatorConfig()
    if n_total < 4:
        raise ValidationError(
            f"split sweep needs at least two atoms per cavity, got N={n_total}"
        )
    param_list = [
        replace(template, n_a=n_a, n_b=n_total - n_a) for n_a in range(2, n_total - 1)
    ]
    summaries = _run_summaries(param_list, grid, cfg, refine, workers)
    meta = {"variable": "n_a", "n_total": n_total, "version": __version__}
    return SweepResult(_rows_from(param_list, summaries), grid, cfg, meta)


@dataclass(frozen=True)
class ConvergenceRow:
    n_ph: int
    e_max: float
    t_e: float
    p_max: float
    t_p: float
    delta_e: float  # |e_max - previous e_max|; nan for the first row


@dataclass(frozen=True)
class ConvergenceStudy:
    rows: tuple[ConvergenceRow, ...]
    threshold: float
    converged: bool
    converged_at: int | None  # first cutoff whose delta fell below threshold


def convergence_study(
    params: ModelParams,
    cutoffs: Sequence[int],
    grid: TimeGrid,
    cfg: PropagatorConfig | None = None,
    theta: int = 1,
    refine: bool = False,
) -> ConvergenceStudy:
    """Charging maxima versus photon cutoff; flags convergence of e_max.

    Converged means consecutive e_max values differ by less than
    1e-4 * N * omega_q.
    """
    cutoffs = list(cutoffs)
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValidationError(f"cutoff list must be strictly increasing, got {cutoffs}")
    if cutoffs[0] < max(params.n_a, params.n_b):
        raise ValidationError(
            f"smallest cutoff {cutoffs[0]} below initial photon number "
            f"max(n_a, n_b)={max(params.n_a, params.n_b)}"
        )
    threshold = 1e-4 * params.n_total * params.omega_q
    rows = []
    prev_e = None
    converged_at = None
    for n_ph in cutoffs:
        p = replace(params, n_ph=n_ph)
        try:
            s = charging_summary(p, grid, cfg, refine=refine, theta=theta)
        except DegenerateTraceError:
            s = ChargingSummary(0.0, 0.0, 0.0, 0.0, False, False)
        delta = math.nan if prev_e is None else abs(s.e_max - prev_e)
        if prev_e is not None and delta < threshold and converged_at is None:
            converged_at = n_ph
        rows.append(ConvergenceRow(n_ph, s.e_max, s.t_e, s.p_max, s.t_p, delta))
        prev_e = s.e_max
    converged = len(rows) > 1 and rows[-1].delta_e < threshold
    return ConvergenceStudy(tuple(rows), threshold, converged, converged_at)


def sweep_exchange(
    params: ModelParams,
    values: Sequence[float],
    grid: TimeGrid,
    cfg: PropagatorConfig | None = None,
    workers: int = 1,
    refine: bool = True,
) -> SweepResult:
    """Charging maxima versus the inter-chain exchange constant, all else fixed.

    The exchange constant has no canonical literature value, so this sweep
    documents its effect; every row snapshot records the value used.
    """
    if cfg is None:
        cfg = PropagatorConfig()
    vals = [float(v) for v in values]
    if not all(math.isfinite(v) for v in vals):
        raise ValidationError(f"exchange values must be finite, got {vals}")
    vals.sort()
    param_list = [replace(params, exchange=v) for v in vals]
    summaries = _run_summaries(param_list, grid, cfg, refine, workers)
    meta = {"variable": "exchange", "version": __version__}
    return SweepResult(_rows_from(param_list, summaries), grid, cfg, meta)


def oracle_check(
    params: ModelParams,
    grid: TimeGrid,
    cfg: PropagatorConfig | None = None,
    theta: int = 1,
    max_dimension: int = 4000,
) -> tuple[np.ndarray, np.ndarray]:
    """Stepped Krylov trace versus the dense spectral propagator.

    Returns (times, deviation norms). Only sensible at small dimensions
    where the dense decomposition is exact and affordable.
    """
    if cfg is None:
        cfg = PropagatorConfig()
    basis = build_basis(params)
    if basis.dimension > max_dimension:
        raise ValidationError(
            f"oracle check needs dimension <= {max_dimension}, got {basis.dimension}"
        )
    h = build_total(basis, ChargingProtocol(theta=theta, duration=grid.t_max))
    psi0 = initial_state(basis)
    dense = DensePropagator(h)
    devs = np.empty(grid.samples)
    for k, (t, psi) in enumerate(evolve_trace(h, psi0, grid, cfg)):
        devs[k] = np.linalg.norm(psi - dense.apply(psi0, t))
    return grid.times, devs
