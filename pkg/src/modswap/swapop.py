"""Implicit one-sparse operator on the doubled space and its exact exponential.

For an N x N Hermitian source A, the doubled-space operator maps basis vector
|j, k> to A[j, k] |k, j>, so the flattened index p*N + q plays the role of
|p> (x) |q> with the first factor the ancilla register. Columns are
one-sparse, which splits the space into N fixed points (j, j) and N(N-1)/2
two-dimensional invariant blocks {(j, k), (k, j)}. The exponential
exp(-i t op) is therefore exact and costs O(N^2), never materializing the
N^2 x N^2 matrix:

* component (j, j) picks up the phase exp(-i A[j,j] t);
* the pair block with a = A[j, k], j < k, rotates by
  [[cos(|a| t), -i e^{i arg a} sin(|a| t)],
   [-i e^{-i arg a} sin(|a| t), cos(|a| t)]]
  in the ordered basis (|k, j>, |j, k>).

One ``build_plan`` call performs one counted oracle sweep (N(N+1)/2 queries,
the lower triangle coming from Hermitian symmetry) and can then be applied
to any number of vectors or density-matrix columns at any time value.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .oracle import MatrixOracle

DIAG_IMAG_TOL = 1e-10


@dataclass
class BlockPlan:
    """One oracle sweep's worth of block data, reusable across time values."""

    dim: int
    diag_index: np.ndarray
    diag_value: np.ndarray
    row_kj: np.ndarray
    row_jk: np.ndarray
    offdiag: np.ndarray

    def apply(self, x, t: float, axis: int = 0) -> np.ndarray:
        """Apply exp(-i t op) along one axis of x (length N^2)."""
        x = np.asarray(x, dtype=np.complex128)
        nn = self.dim * self.dim
        if x.shape[axis] != nn:
            raise ValueError(
                f"axis {axis} has length {x.shape[axis]}, expected {nn}"
            )
        moved = np.moveaxis(x, axis, 0)
        out = moved.copy()
        tail = (1,) * (moved.ndim - 1)

        phase = np.exp(-1j * self.diag_value * t).reshape((-1,) + tail)
        out[self.diag_index] = moved[self.diag_index] * phase

        if self.offdiag.size:
            mag = np.abs(self.offdiag)
            unit = np.where(mag > 0, self.offdiag / np.where(mag > 0, mag, 1.0), 1.0)
            c = np.cos(mag * t).reshape((-1,) + tail)
            s = np.sin(mag * t).reshape((-1,) + tail)
            u = unit.reshape((-1,) + tail)
            hi = moved[self.row_kj]
            lo = moved[self.row_jk]
            out[self.row_kj] = c * hi - 1j * u * s * lo
            out[self.row_jk] = -1j * np.conj(u) * s * hi + c * lo
        return np.moveaxis(out, 0, axis)

    def conjugate(self, joint: np.ndarray, t: float) -> np.ndarray:
        """U J U† for the doubled-space density J, reusing this plan's sweep."""
        left = self.apply(joint, t, axis=0)
        return self.apply(left.conj().T, t, axis=0).conj().T

    def kraus(self, t: float) -> np.ndarray:
        """Kraus operators of the uniform-ancilla channel step at time t.

        Tracing the fresh pure ancilla out of the conjugation by
        exp(-i t op) leaves X -> sum_a K_a X K_a† with
        K_a[s, t'] = sum_a' U[(a,s), (a',t')] / sqrt(N); the one-sparse rows
        make every K_a explicit: cosines on the diagonal, the rotated sine
        column at index a, and the bare phase at (a, a).
        """
        n = self.dim
        k = np.zeros((n, n, n), dtype=np.complex128)
        if self.offdiag.size:
            j_idx = self.row_kj % n
            k_idx = self.row_kj // n
            mag = np.abs(self.offdiag)
            unit = np.where(mag > 0, self.offdiag / np.where(mag > 0, mag, 1.0), 1.0)
            c = np.cos(mag * t)
            s = np.sin(mag * t)
            k[k_idx, j_idx, j_idx] = c
            k[j_idx, k_idx, k_idx] = c
            k[k_idx, j_idx, k_idx] = -1j * unit * s
            k[j_idx, k_idx, j_idx] = -1j * np.conj(unit) * s
        rng_n = np.arange(n)
        k[rng_n, rng_n, rng_n] = np.exp(-1j * self.diag_value * t)
        return k / np.sqrt(n)


@dataclass(frozen=True)
class SwapSpectrum:
    """Doubled-space spectrum: N diagonal values plus +-|A[j,k]| sign pairs."""

    diagonal_values: np.ndarray
    pair_values: np.ndarray

    def multiset(self) -> np.ndarray:
        """All N^2 eigenvalues, ascending."""
        vals = np.concatenate(
            [self.diagonal_values, self.pair_values, -self.pair_values]
        )
        return np.sort(vals)

    @property
    def max_abs(self) -> float:
        """Largest |eigenvalue|; equals the max-element norm of the source."""
        cands = [np.max(np.abs(self.diagonal_values))] if self.diagonal_values.size else []
        if self.pair_values.size:
            cands.append(np.max(self.pair_values))
        return float(max(cands)) if cands else 0.0


class ModifiedSwapOperator:
    """Doubled-space view of a Hermitian oracle, applied only implicitly."""

    def __init__(self, oracle: MatrixOracle):
        self.oracle = oracle
        self.dim = oracle.dim

    def build_plan(self) -> BlockPlan:
        """One counted oracle sweep over the diagonal and upper triangle."""
        n = self.dim
        diag_index = np.arange(n) * n + np.arange(n)
        diag_value = np.empty(n)
        for j in range(n):
            v = self.oracle.query(j, j)
            if abs(v.imag) > DIAG_IMAG_TOL * max(1.0, abs(v)):
                raise ValueError(f"non-Hermitian source: diagonal ({j},{j}) = {v}")
            diag_value[j] = v.real
        rows_kj, rows_jk, vals = [], [], []
        for j in range(n):
            for k in range(j + 1, n):
                rows_kj.append(k * n + j)
                rows_jk.append(j * n + k)
                vals.append(self.oracle.query(j, k))
        return BlockPlan(
            dim=n,
            diag_index=diag_index,
            diag_value=diag_value,
            row_kj=np.array(rows_kj, dtype=np.intp),
            row_jk=np.array(rows_jk, dtype=np.intp),
            offdiag=np.array(vals, dtype=np.complex128),
        )

    def apply_exp(self, t: float, psi) -> np.ndarray:
        """exp(-i t op) psi on the N^2-dimensional doubled space."""
        psi = np.asarray(psi, dtype=np.complex128)
        nn = self.dim * self.dim
        if psi.shape != (nn,):
            raise ValueError(f"state has shape {psi.shape}, expected ({nn},)")
        nrm = np.linalg.norm(psi)
        if abs(nrm - 1.0) > 1e-9:
            warnings.warn(f"input state norm {nrm:.6g} != 1; proceeding", stacklevel=2)
        return self.build_plan().apply(psi, t)

    def controlled_apply_exp(self, t: float, psi) -> np.ndarray:
        """exp(-i t |1><1| (x) op) on a control qubit tensor the doubled space.

        The first N^2 amplitudes (control 0) pass through unchanged.
        """
        psi = np.asarray(psi, dtype=np.complex128)
        nn = self.dim * self.dim
        if psi.shape != (2 * nn,):
            raise ValueError(f"state has shape {psi.shape}, expected ({2 * nn},)")
        nrm = np.linalg.norm(psi)
        if abs(nrm - 1.0) > 1e-9:
            warnings.warn(f"input state norm {nrm:.6g} != 1; proceeding", stacklevel=2)
        out = psi.copy()
        out[nn:] = self.build_plan().apply(psi[nn:], t)
        return out

    def spectrum(self) -> SwapSpectrum:
        """Closed-form eigenvalues: {A[j,j]} plus +-|A[j,k]| for j < k."""
        plan = self.build_plan()
        return SwapSpectrum(
            diagonal_values=plan.diag_value.copy(),
            pair_values=np.abs(plan.offdiag),
        )

    def square_diagonal(self) -> np.ndarray:
        """Diagonal of the squared operator: |A[j,k]|^2 at index k*N + j."""
        plan = self.build_plan()
        n = self.dim
        d = np.zeros(n * n)
        d[plan.diag_index] = plan.diag_value**2
        mags2 = np.abs(plan.offdiag) ** 2
        d[plan.row_kj] = mags2
        d[plan.row_jk] = mags2
        return d
