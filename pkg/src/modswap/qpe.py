"""Simulated phase estimation over the controlled scaled evolution.

The register convention is two's complement: a b-bit register value m
encodes the phase m / 2^b, values at or above 1/2 wrap to negative, and the
decoded eigenvalue of the scaled generator (eigenvalues of A divided by the
dimension) is wrap(m / 2^b) * 2*pi / t0 for base evolution time t0. The
anti-aliasing requirement t0 * max_norm(A) <= pi keeps every phase inside
(-1/2, 1/2].

Two interchangeable backends:

* ``exact-unitary``: the controlled powers are computed from the classical
  eigendecomposition; pure-state simulation, cheap, and exact up to register
  discretization. Costs one counted Hermitian oracle read.
* ``trotter-channel``: each controlled power is realized by repeated
  ancilla-assisted channel steps (fresh uniform ancilla per step, one
  counted oracle sweep per step), so the register + system state is a
  density matrix. Faithful but exponentially expensive; keep N and the
  register small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import max_channel_dim
from .linalg import hermitize
from .oracle import MatrixOracle, read_hermitian
from .swapop import ModifiedSwapOperator

PEAK_MIN_WEIGHT = 0.01


@dataclass(frozen=True)
class QPEConfig:
    """Register size, base evolution time, backend, and channel budget.

    base_time None means "resolve at run time" to pi / max_norm scaled just
    under the aliasing bound. trotter_epsilon is the nuclear-norm error
    budget for each controlled power application on the trotter backend.
    """

    bits: int
    base_time: float | None = None
    backend: str = "exact-unitary"
    trotter_epsilon: float = 0.01

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("register needs at least one bit")
        if self.backend not in ("exact-unitary", "trotter-channel"):
            raise ValueError(f"unknown backend '{self.backend}'")
        if self.trotter_epsilon <= 0:
            raise ValueError("trotter_epsilon must be positive")

    @property
    def size(self) -> int:
        return 1 << self.bits


@dataclass(frozen=True)
class EigenEstimate:
    """One decoded register peak."""

    register_value: int
    value: float
    weight: float
    sign: int


@dataclass
class QPEResult:
    distribution: np.ndarray
    estimates: list[EigenEstimate]
    joint: np.ndarray
    backend: str
    bits: int
    base_time: float
    oracle_calls: int
    trotter_error_bound: float | None = None
    all_peaks: list[EigenEstimate] = field(default_factory=list)


def decode_register(m: int, bits: int, t0: float) -> float:
    """Signed eigenvalue estimate from a register value (two's complement)."""
    size = 1 << bits
    if not 0 <= m < size:
        raise ValueError(f"register value {m} outside [0, {size})")
    phase = m / size
    if phase >= 0.5:
        phase -= 1.0
    return phase * 2.0 * math.pi / t0


def default_base_time(max_norm: float) -> float:
    """Largest aliasing-safe base time, just inside t0 * max_norm = pi."""
    if max_norm <= 0:
        return 1.0
    return math.pi / (max_norm * (1.0 + 1e-9))


def _check_aliasing(t0: float, max_norm: float) -> None:
    if t0 * max_norm > math.pi * (1.0 + 1e-9):
        raise ValueError(
            f"aliasing: t0 * max_norm = {t0 * max_norm:.6g} exceeds pi"
        )


def _require_state(psi, n: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if psi.shape != (n,):
        raise ValueError(f"state has dim {psi.shape[0]}, expected {n}")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError(f"state norm {nrm:.6g} != 1")
    return psi / nrm


def joint_from_eig(evals_over_n, evecs, psi, bits: int, t0: float) -> np.ndarray:
    """Post-QPE joint amplitudes J[register, system] from known eigenpairs.

    J = F G where G[m, :] is the m-th controlled power of exp(-i gen t0)
    applied to psi (uniform register weights folded in) and F is the
    register Fourier kernel exp(2*pi*i*y*m / M) / sqrt(M), chosen so positive
    eigenvalues land in the lower register half.
    """
    size = 1 << bits
    beta = evecs.conj().T @ psi
    powers = np.exp(-1j * np.outer(np.arange(size), np.asarray(evals_over_n)) * t0)
    g = (powers * beta) @ evecs.T
    return np.fft.ifft(g, axis=0)


def invert_joint(joint, evals_over_n, evecs, bits: int, t0: float) -> np.ndarray:
    """Exact inverse of the circuit behind ``joint_from_eig``.

    Returns the register-resolved pre-circuit amplitudes; row 0 is the
    component on which the register uncomputed cleanly back to zero.
    """
    size = 1 << bits
    x = np.fft.fft(joint, axis=0) / math.sqrt(size)
    beta = x @ evecs.conj()
    powers = np.exp(1j * np.outer(np.arange(size), np.asarray(evals_over_n)) * t0)
    x2 = (powers * beta) @ evecs.T
    # undo the uniform register layer: Hadamard rows; row 0 collects the sum
    return (_hadamard_signs(bits) @ x2) / math.sqrt(size)


def _hadamard_signs(bits: int) -> np.ndarray:
    size = 1 << bits
    z = np.arange(size)
    ands = z[:, None] & z[None, :]
    pop = np.zeros_like(ands)
    while ands.any():
        pop += ands & 1
        ands >>= 1
    return np.where(pop % 2, -1.0, 1.0)


def extract_estimates(distribution, bits: int, t0: float,
                      min_weight: float = PEAK_MIN_WEIGHT,
                      threshold: float = 0.0) -> list[EigenEstimate]:
    """Cyclic local maxima of the register distribution, decoded and signed.

    Peaks below min_weight are dropped; threshold additionally filters the
    list (never the state) by |decoded value|.
    """
    p = np.asarray(distribution, dtype=float)
    size = p.shape[0]
    half = size // 2
    peaks = []
    for y in range(size):
        if p[y] < min_weight:
            continue
        if p[y] >= p[(y - 1) % size] and p[y] >= p[(y + 1) % size]:
            value = decode_register(y, bits, t0)
            if abs(value) < threshold:
                continue
            peaks.append(EigenEstimate(
                register_value=y,
                value=value,
                weight=float(p[y]),
                sign=-1 if y >= half else 1,
            ))
    peaks.sort(key=lambda e: (-e.weight, e.register_value))
    return peaks


def _exact_backend(oracle: MatrixOracle, psi, config: QPEConfig):
    a = read_hermitian(oracle)
    n = a.shape[0]
    a_max = float(np.max(np.abs(a)))
    t0 = config.base_time if config.base_time is not None else default_base_time(a_max)
    _check_aliasing(t0, a_max)
    w, v = np.linalg.eigh(hermitize(a))
    joint = joint_from_eig(w / n, v, psi, config.bits, t0)
    dist = np.sum(np.abs(joint) ** 2, axis=1)
    return joint, dist, t0, None


def _controlled_sweep_step(plan, dens4, on_mask, dt: float) -> np.ndarray:
    """One fresh-ancilla channel step of the control-conditioned evolution.

    The control-off register rows see the identity channel, which fits the
    same Kraus sum with K_a replaced by I/sqrt(N); a single register-indexed
    Kraus stack therefore advances the whole register x system density in
    two batched matrix products.
    """
    n = plan.dim
    size = dens4.shape[0]
    kraus = plan.kraus(dt)
    idle = np.eye(n, dtype=np.complex128) / math.sqrt(n)
    stack = np.where(on_mask[None, :, None, None], kraus[:, None], idle[None, None])
    # half[a,m,s,(q,u)] = sum_t stack[a,m,s,t] dens4[m,t,q,u]
    half = stack @ dens4.reshape(size, n, size * n)
    # out[m,s,q,v] = sum_{a,u} half[a,m,s,q,u] conj(stack[a,q,v,u])
    half_t = half.reshape(n, size, n, size, n).transpose(0, 3, 1, 2, 4)
    prod = half_t.reshape(n, size, size * n, n) @ stack.conj().transpose(0, 1, 3, 2)
    out = prod.sum(axis=0).reshape(size, size, n, n).transpose(1, 2, 0, 3)
    return np.ascontiguousarray(out)


def _register_fourier_density(dens, size: int, n: int) -> np.ndarray:
    """(F (x) I) dens (F (x) I)† with the same kernel as the exact backend."""

    def left(x):
        x3 = x.reshape(size, n, -1)
        return (np.fft.ifft(x3, axis=0) * math.sqrt(size)).reshape(size * n, -1)

    t1 = left(dens)
    return left(t1.conj().T).conj().T


def _trotter_backend(oracle: MatrixOracle, psi, config: QPEConfig):
    op = ModifiedSwapOperator(oracle)
    n = op.dim
    a_max = op.spectrum().max_abs
    t0 = config.base_time if config.base_time is not None else default_base_time(a_max)
    _check_aliasing(t0, a_max)
    size = config.size
    cap = max_channel_dim() ** 2
    if size * n * n > cap:
        raise ValueError(
            f"trotter backend needs a (2^bits * N^2)-dimensional density "
            f"({size * n * n} > {cap}); reduce bits or N, or raise QSVD_MAX_DIM"
        )

    x = np.kron(np.full(size, 1.0 / math.sqrt(size)), psi)
    dens4 = np.outer(x, x.conj()).reshape(size, n, size, n)

    error_bound = 0.0
    for k in range(config.bits):
        tau = (1 << k) * t0
        steps = max(1, math.ceil(2.0 * a_max**2 * tau**2 / config.trotter_epsilon))
        dt = tau / steps
        on_mask = (np.arange(size) >> k) & 1 == 1
        error_bound += steps * 2.0 * a_max**2 * dt**2
        for _ in range(steps):
            plan = op.build_plan()
            dens4 = _controlled_sweep_step(plan, dens4, on_mask, dt)

    dens = _register_fourier_density(dens4.reshape(size * n, size * n), size, n)
    dist = np.real(np.einsum("msms->m", dens.reshape(size, n, size, n)))
    return dens, dist, t0, error_bound


def qpe(oracle: MatrixOracle, psi, config: QPEConfig,
        threshold: float = 0.0) -> QPEResult:
    """Run phase estimation and decode register peaks into eigenvalue estimates.

    The returned estimates list is filtered at |value| >= threshold; the
    joint state (amplitudes for the exact backend, a register x system
    density matrix for the trotter backend) is never filtered.
    """
    n = oracle.dim
    psi = _require_state(psi, n)
    calls_before = oracle.report_calls()
    if config.backend == "exact-unitary":
        joint, dist, t0, bound = _exact_backend(oracle, psi, config)
    else:
        joint, dist, t0, bound = _trotter_backend(oracle, psi, config)
    all_peaks = extract_estimates(dist, config.bits, t0)
    estimates = [e for e in all_peaks if abs(e.value) >= threshold]
    return QPEResult(
        distribution=np.asarray(dist, dtype=float),
        estimates=estimates,
        joint=joint,
        backend=config.backend,
        bits=config.bits,
        base_time=t0,
        oracle_calls=oracle.report_calls() - calls_before,
        trotter_error_bound=bound,
        all_peaks=all_peaks,
    )


@dataclass(frozen=True)
class AgreementReport:
    tv_distance: float
    trotter_calls: int
    exact_distribution: np.ndarray
    trotter_distribution: np.ndarray


def backend_agreement(oracle: MatrixOracle, psi, config: QPEConfig) -> AgreementReport:
    """Total-variation distance between the two backends' register outputs.

    Guarded to small systems; the trotter backend cost grows exponentially
    with register size.
    """
    if oracle.dim > 4 or config.bits > 4:
        raise ValueError("backend_agreement is limited to N <= 4 and bits <= 4")
    exact = qpe(oracle.fork(), psi, QPEConfig(
        bits=config.bits, base_time=config.base_time,
        backend="exact-unitary", trotter_epsilon=config.trotter_epsilon))
    trotter = qpe(oracle.fork(), psi, QPEConfig(
        bits=config.bits, base_time=config.base_time,
        backend="trotter-channel", trotter_epsilon=config.trotter_epsilon))
    tv = 0.5 * float(np.sum(np.abs(exact.distribution - trotter.distribution)))
    return AgreementReport(
        tv_distance=tv,
        trotter_calls=trotter.oracle_calls,
        exact_distribution=exact.distribution,
        trotter_distribution=trotter.distribution,
    )


@dataclass(frozen=True)
class ScalingRow:
    epsilon: float
    bits: int
    trotter_epsilon: float
    oracle_calls: int


@dataclass(frozen=True)
class ScalingResult:
    rows: list[ScalingRow]
    slope: float


def query_scaling(oracle: MatrixOracle, psi, epsilons,
                  base_bits: int = 2, base_time: float | None = None) -> ScalingResult:
    """Trotter-backend oracle calls vs accuracy, on the coupled schedule.

    Halving the target accuracy both doubles the total phase-estimation time
    (one extra register bit) and halves the per-application channel budget,
    the regime in which total queries scale like accuracy^-3. epsilons must
    be descending from epsilons[0].
    """
    eps = [float(e) for e in epsilons]
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilons must be strictly descending")
    rows = []
    for e in eps:
        extra = int(round(math.log2(eps[0] / e)))
        cfg = QPEConfig(bits=base_bits + extra, base_time=base_time,
                        backend="trotter-channel", trotter_epsilon=e)
        fork = oracle.fork()
        result = qpe(fork, psi, cfg)
        rows.append(ScalingRow(epsilon=e, bits=cfg.bits,
                               trotter_epsilon=e, oracle_calls=result.oracle_calls))
    xs = np.log([1.0 / r.epsilon for r in rows])
    ys = np.log([r.oracle_calls for r in rows])
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(rows) >= 2 else float("nan")
    return ScalingResult(rows=rows, slope=slope)
