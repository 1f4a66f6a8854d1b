"""Repeated-ancilla evolution channel and its error accounting.

One step sends sigma to the partial trace (over a fresh uniform-superposition
ancilla) of the doubled-space conjugation by exp(-i op dt). To second order
in dt this reproduces conjugation of sigma by exp(-i (A/N) dt); iterating n
forward-Euler steps of size t/n approximates the full evolution, with the
per-step trace-norm error bounded by 2 * max_norm(A)^2 * dt^2. That bound
fixes the concrete step count n = ceil(2 * max_norm^2 * t^2 / epsilon) for a
total error budget epsilon.

Each step performs one counted oracle sweep (N(N+1)/2 queries) and consumes
a new ancilla copy; nothing is carried over between steps. All error metrics
are nuclear (trace) norms against the exact unitary baseline.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .linalg import (
    as_matrix,
    exact_evolution,
    hermitize,
    hermiticity_residual,
    nuclear_norm,
)
from .oracle import MatrixOracle, read_hermitian
from .swapop import ModifiedSwapOperator

DEFAULT_MAX_DIM = 64


def max_channel_dim() -> int:
    """Memory guard on N; the joint space is N^2 x N^2. Env-overridable."""
    raw = os.environ.get("QSVD_MAX_DIM")
    return int(raw) if raw else DEFAULT_MAX_DIM


def uniform_density(n: int) -> np.ndarray:
    """Projector onto the uniform superposition: every entry 1/n."""
    return np.full((n, n), 1.0 / n, dtype=np.complex128)


def require_density(rho, trace_tol: float = 1e-12, psd_tol: float = 1e-10) -> np.ndarray:
    """Validate Hermiticity, unit trace, and positivity of a density matrix."""
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got {rho.shape}")
    scale = max(1.0, float(np.max(np.abs(rho))))
    if hermiticity_residual(rho) > 1e-12 * scale:
        raise ValueError("density matrix is not Hermitian")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr} != 1")
    wmin = float(np.min(np.linalg.eigvalsh(hermitize(rho))))
    if wmin < -psd_tol:
        raise ValueError(f"density matrix has negative eigenvalue {wmin:.3e}")
    return rho


def pure_density(psi) -> np.ndarray:
    """|psi><psi| for a (normalized) state vector."""
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def _partial_trace_first(joint: np.ndarray, n: int) -> np.ndarray:
    return np.einsum("pqpr->qr", joint.reshape(n, n, n, n))


def first_order_generator(oracle: MatrixOracle, sigma) -> np.ndarray:
    """(A/N) sigma via the partial-trace contraction with the uniform ancilla.

    The contraction sums A[j,k] <j|rho|k> |j><k| sigma; with the uniform
    ancilla every <j|rho|k> is 1/N, so the result equals (A/N) @ sigma.
    """
    sigma = as_matrix(sigma)
    n = oracle.dim
    if sigma.shape != (n, n):
        raise ValueError(f"state dim {sigma.shape} != oracle dim {n}")
    a = read_hermitian(oracle)
    return (a * uniform_density(n)) @ sigma


def channel_step(oracle: MatrixOracle, sigma, delta_t: float,
                 validate: bool = True) -> np.ndarray:
    """One ancilla-assisted step: trace out register 1 of U (rho (x) sigma) U†.

    delta_t may be negative (time reversal). Output is hermitized to remove
    floating-point asymmetry; trace and positivity are preserved by
    construction.
    """
    sigma = require_density(sigma) if validate else as_matrix(sigma)
    n = oracle.dim
    if sigma.shape != (n, n):
        raise ValueError(f"state dim {sigma.shape} != oracle dim {n}")
    cap = max_channel_dim()
    if n > cap:
        raise ValueError(
            f"N={n} exceeds the channel memory guard ({cap}); "
            "set QSVD_MAX_DIM to override"
        )
    joint = np.kron(uniform_density(n), sigma)
    plan = ModifiedSwapOperator(oracle).build_plan()
    return hermitize(_partial_trace_first(plan.conjugate(joint, delta_t), n))


@dataclass(frozen=True)
class EvolutionConfig:
    """Step plan for a total time t under a nuclear-norm error budget."""

    t: float
    epsilon: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("step count must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    @property
    def delta_t(self) -> float:
        return self.t / self.n

    @classmethod
    def plan(cls, max_norm: float, t: float, epsilon: float,
             steps: int | None = None) -> "EvolutionConfig":
        """n = ceil(2 * max_norm^2 * t^2 / epsilon) unless overridden."""
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if steps is None:
            steps = max(1, math.ceil(2.0 * max_norm**2 * t**2 / epsilon))
        return cls(t=float(t), epsilon=float(epsilon), n=int(steps))


@dataclass(frozen=True)
class ErrorReport:
    """Measured vs bounded nuclear-norm errors for one evolution run."""

    per_step_bound: float
    measured_step_error: float
    total_measured: float
    total_bound: float


def evolve(oracle: MatrixOracle, sigma, config: EvolutionConfig):
    """Run n channel steps and compare against the exact unitary baseline.

    Returns (final density matrix, ErrorReport). measured_step_error is the
    largest single-step deviation encountered along the chain.
    """
    sigma = require_density(sigma)
    a = hermitize(oracle.materialize())
    a_max = float(np.max(np.abs(a)))
    dt = config.delta_t
    per_step_bound = 2.0 * a_max**2 * dt**2

    cur = sigma
    worst_step = 0.0
    for _ in range(config.n):
        nxt = channel_step(oracle, cur, dt, validate=False)
        step_err = nuclear_norm(nxt - exact_evolution(a, dt, cur))
        worst_step = max(worst_step, step_err)
        cur = nxt

    total = nuclear_norm(cur - exact_evolution(a, config.t, sigma))
    report = ErrorReport(
        per_step_bound=per_step_bound,
        measured_step_error=worst_step,
        total_measured=total,
        total_bound=config.n * per_step_bound,
    )
    return cur, report


@dataclass(frozen=True)
class SweepRow:
    delta_t: float
    measured_error: float
    bound: float

    @property
    def ratio(self) -> float:
        return self.measured_error / self.bound if self.bound else float("nan")


@dataclass(frozen=True)
class SweepResult:
    rows: list[SweepRow]
    slope: float


def error_sweep(oracle: MatrixOracle, sigma, delta_ts) -> SweepResult:
    """Single-step error vs dt, with the log-log convergence slope.

    delta_ts must be positive and strictly descending.
    """
    dts = [float(d) for d in delta_ts]
    if not dts or any(d <= 0 for d in dts):
        raise ValueError("delta_t values must be positive")
    if any(b >= a for a, b in zip(dts, dts[1:])):
        raise ValueError("delta_t values must be strictly descending")
    sigma = require_density(sigma)
    a = hermitize(oracle.materialize())
    a_max = float(np.max(np.abs(a)))

    rows = []
    for dt in dts:
        measured = nuclear_norm(
            channel_step(oracle, sigma, dt, validate=False)
            - exact_evolution(a, dt, sigma)
        )
        rows.append(SweepRow(delta_t=dt, measured_error=measured,
                             bound=2.0 * a_max**2 * dt**2))
    xs = np.log([r.delta_t for r in rows])
    ys = np.log([max(r.measured_error, 1e-300) for r in rows])
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(rows) >= 2 else float("nan")
    return SweepResult(rows=rows, slope=slope)


def effective_rank(a, t: float) -> int:
    """Number of eigenvalues of A/N at least 1/t in magnitude (reported only)."""
    a = as_matrix(a)
    if t <= 0:
        return 0
    w = np.linalg.eigvalsh(hermitize(a)) / a.shape[0]
    return int(np.sum(np.abs(w) >= 1.0 / t))
