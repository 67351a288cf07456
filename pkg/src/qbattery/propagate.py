"""Unitary time evolution psi(t) = exp(-i H t) psi(0).

Two interchangeable methods:

* ``dense``  -- full spectral decomposition (numpy.linalg.eigh). Exact up
  to roundoff; the oracle for cross-checks. Practical to a few thousand
  basis states.
* ``krylov`` -- Lanczos subspace exponential with adaptive substeps. The
  subspace is grown one vector at a time until the standard a-posteriori
  estimate beta_k * |y_k| for the current substep drops below the local
  tolerance; if the full subspace cannot resolve the substep, the substep
  is halved (the already-built subspace is reused, no matrix-vector
  products are repeated). After each accepted substep the state is
  renormalized, which pins the norm drift at roundoff level.

The Lanczos recurrence itself runs through qbattery.kernels, i.e. in the
compiled extension when available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from . import kernels
from .errors import ConvergenceError, DimensionMismatchError, ValidationError

_BREAKDOWN_TOL = 1e-13  # happy breakdown: invariant subspace found


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling of the charging window [0, t_max]."""

    t_max: float
    dt: float = 0.05

    def __post_init__(self):
        if self.dt <= 0:
            raise ValidationError(f"dt must be > 0, got {self.dt}")
        if self.t_max < self.dt:
            raise ValidationError(f"t_max={self.t_max} must be >= dt={self.dt}")

    @property
    def samples(self) -> int:
        return int(math.floor(self.t_max / self.dt + 1e-9)) + 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples) * self.dt


@dataclass(frozen=True)
class PropagatorConfig:
    method: str = "krylov"
    krylov_dim: int = 30
    tol: float = 1e-9
    max_step: float | None = None

    def __post_init__(self):
        if self.method not in ("krylov", "dense"):
            raise ValidationError(f"method must be 'krylov' or 'dense', got {self.method!r}")
        if self.krylov_dim < 2:
            raise ValidationError(f"krylov_dim must be >= 2, got {self.krylov_dim}")
        if self.tol <= 0:
            raise ValidationError(f"tol must be > 0, got {self.tol}")
        if self.max_step is not None and self.max_step <= 0:
            raise ValidationError(f"max_step must be > 0, got {self.max_step}")


class DensePropagator:
    """Spectral-decomposition propagator; diagonalizes H once."""

    def __init__(self, h):
        mat = h.toarray() if sp.issparse(h) else np.asarray(h)
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(mat)

    def apply(self, psi: np.ndarray, t: float) -> np.ndarray:
        c = self.eigenvectors.conj().T @ psi
        return self.eigenvectors @ (np.exp(-1j * t * self.eigenvalues) * c)


def _expm_tridiag_e1(alphas, betas, tau):
    """y = exp(-i tau T) e1 for the real symmetric tridiagonal T."""
    theta, s = scipy.linalg.eigh_tridiagonal(alphas, betas)
    return s @ (np.exp(-1j * tau * theta) * s[0, :])


def _krylov_substep(h, psi, tau, tol, m, tau_floor):
    """Advance psi by (up to) tau; returns (new_psi, tau_done).

    psi must be unit norm. The Krylov basis is grown until the error
    estimate for the full tau converges; if it cannot within m vectors,
    tau is halved on the fixed basis until it does.
    """
    basis = [psi]
    alphas: list[float] = []
    betas: list[float] = []
    v_prev = psi
    v_curr = psi
    beta_prev = 0.0
    w = np.empty_like(psi)
    y = None

    for j in range(m):
        alpha, beta = kernels.lanczos_iteration(h, v_curr, v_prev, beta_prev, w)
        alphas.append(alpha)
        y = _expm_tridiag_e1(np.array(alphas), np.array(betas), tau)
        scale = max(1.0, abs(alpha), beta_prev)
        if beta <= _BREAKDOWN_TOL * scale:
            break  # invariant subspace found; the exponential is exact here
        if beta * abs(y[-1]) <= tol:
            break
        betas.append(beta)
        if j < m - 1:
            v_next = w / beta
            basis.append(v_next)
            v_prev, beta_prev, v_curr = v_curr, beta, v_next
    else:
        # subspace exhausted: shrink tau on the built basis (no new matvecs)
        betas_t = np.array(betas[: len(alphas) - 1])
        alphas_t = np.array(alphas)
        while True:
            tau *= 0.5
            if abs(tau) < tau_floor:
                raise ConvergenceError(
                    f"krylov step failed to reach tol={tol} within "
                    f"krylov_dim={m}; reduce max_step or increase krylov_dim"
                )
            y = _expm_tridiag_e1(alphas_t, betas_t, tau)
            err = betas[-1] * abs(y[-1]) if betas else 0.0
            if err <= tol:
                break

    k = len(y)
    out = np.zeros_like(psi)
    for i in range(k):
        out += y[i] * basis[i]
    out /= np.linalg.norm(out)
    return out, tau


def _krylov_apply(h, psi, t, cfg):
    """exp(-i h t) applied to unit-norm psi with adaptive substepping."""
    if t == 0.0:
        return psi.copy()
    sign = 1.0 if t > 0 else -1.0
    remaining = abs(t)
    max_step = cfg.max_step if cfg.max_step is not None else remaining
    tau_floor = max(abs(t), 1.0) * 1e-14
    while remaining > 0.0:
        tau = min(remaining, max_step)
        psi, tau_done = _krylov_substep(h, psi, sign * tau, cfg.tol, cfg.krylov_dim, tau_floor)
        if abs(tau_done) >= remaining:
            remaining = 0.0
        else:
            remaining -= abs(tau_done)
    return psi


def _check_pair(h, psi):
    if h.shape[0] != h.shape[1]:
        raise DimensionMismatchError(f"H must be square, got {h.shape}")
    if psi.shape != (h.shape[0],):
        raise DimensionMismatchError(
            f"state of length {psi.shape} does not match H of dimension {h.shape[0]}"
        )


def propagate_to(h, psi0: np.ndarray, t: float, cfg: PropagatorConfig | None = None) -> np.ndarray:
    """Return exp(-i H t) psi0.

    Deterministic for a fixed config; raises ConvergenceError if the
    Krylov subspace cannot meet cfg.tol even after substep reduction.
    """
    if cfg is None:
        cfg = PropagatorConfig()
    psi0 = np.asarray(psi0, dtype=np.complex128)
    _check_pair(h, psi0)
    if cfg.method == "dense":
        return DensePropagator(h).apply(psi0, t)
    nrm = np.linalg.norm(psi0)
    if nrm == 0.0:
        raise ValidationError("cannot propagate the zero vector")
    out = _krylov_apply(sp.csr_matrix(h) if not sp.issparse(h) else h.tocsr(), psi0 / nrm, t, cfg)
    if nrm != 1.0:
        out = out * nrm
    return out


def evolve_trace(h, psi0: np.ndarray, grid: TimeGrid, cfg: PropagatorConfig | None = None):
    """Yield (t_k, psi(t_k)) at every grid sample, stepping sample to sample.

    A generator, so callers can stream observables and discard states;
    each yielded state is an independent array.
    """
    if cfg is None:
        cfg = PropagatorConfig()
    psi0 = np.asarray(psi0, dtype=np.complex128)
    _check_pair(h, psi0)
    times = grid.times
    if cfg.method == "dense":
        prop = DensePropagator(h)
        for t in times:
            yield float(t), prop.apply(psi0, float(t))
        return
    h = sp.csr_matrix(h) if not sp.issparse(h) else h.tocsr()
    nrm = np.linalg.norm(psi0)
    if nrm == 0.0:
        raise ValidationError("cannot propagate the zero vector")
    psi = psi0 / nrm
    yield 0.0, (psi * nrm if nrm != 1.0 else psi.copy())
    for t in times[1:]:
        psi = _krylov_apply(h, psi, grid.dt, cfg)
        yield float(t), (psi * nrm if nrm != 1.0 else psi.copy())
