"""Call-counted element access to a matrix.

The oracle is the only sanctioned data path for the simulated pipelines, so
its counter is the simulator's query-complexity meter. Sources are either a
dense backing array or a pure function (j, k) -> complex; both share the
same counting interface and can be swapped freely.

Classical baselines and verifiers go through ``materialize``, which reads
the source directly and does NOT count; reported call counts therefore
measure only the simulated-algorithm path.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, hermitize, require_hermitian


@dataclass(frozen=True)
class SparseOracleRecord:
    """One row of the derived one-sparse oracle over doubled-space labels.

    For input label (j, k) the single potential nonzero of the doubled-space
    operator sits at label (k, j) and carries the value A[j, k].
    """

    row_label: tuple[int, int]
    col_label: tuple[int, int]
    value: complex


class MatrixOracle:
    """Element oracle for an M x N matrix with a race-free query counter.

    Out-of-range queries raise IndexError without touching the counter.
    Concurrent sweeps should each own their own instance (``fork``).
    """

    def __init__(self, source, shape=None):
        if callable(source):
            if shape is None:
                raise ValueError("function-backed oracle needs an explicit shape")
            self._matrix = None
            self._fn = source
            self._shape = (int(shape[0]), int(shape[1]))
        else:
            self._matrix = as_matrix(source)
            self._fn = None
            self._shape = self._matrix.shape
        self._count = 0
        self._lock = threading.Lock()

    @classmethod
    def from_matrix(cls, a) -> "MatrixOracle":
        return cls(as_matrix(a))

    @classmethod
    def from_function(cls, fn, shape) -> "MatrixOracle":
        return cls(fn, shape=shape)

    @property
    def shape(self) -> tuple[int, int]:
        return self._shape

    @property
    def dim(self) -> int:
        m, n = self._shape
        if m != n:
            raise ValueError(f"oracle is not square: shape {self._shape}")
        return m

    @property
    def call_count(self) -> int:
        return self._count

    def fork(self) -> "MatrixOracle":
        """Same source, fresh counter."""
        if self._matrix is not None:
            return MatrixOracle(self._matrix)
        return MatrixOracle(self._fn, shape=self._shape)

    def query(self, j: int, k: int) -> complex:
        """Return A[j, k]; one counted call."""
        m, n = self._shape
        if not (0 <= j < m and 0 <= k < n):
            raise IndexError(f"query ({j}, {k}) outside [0,{m}) x [0,{n})")
        with self._lock:
            self._count += 1
        if self._matrix is not None:
            return complex(self._matrix[j, k])
        return complex(self._fn(j, k))

    def sparse_query(self, pair: tuple[int, int]) -> SparseOracleRecord:
        """One-sparse row lookup on doubled-space labels; one counted call."""
        j, k = pair
        return SparseOracleRecord(
            row_label=(j, k), col_label=(k, j), value=self.query(j, k)
        )

    def report_calls(self) -> int:
        return self._count

    def materialize(self) -> np.ndarray:
        """Dense copy of the source, bypassing the counter.

        Reserved for classical baselines and verification; simulated
        pipelines must use ``query``.
        """
        if self._matrix is not None:
            return self._matrix.copy()
        m, n = self._shape
        out = np.empty((m, n), dtype=np.complex128)
        for j in range(m):
            for k in range(n):
                out[j, k] = self._fn(j, k)
        return as_matrix(out)


def read_hermitian(oracle: MatrixOracle) -> np.ndarray:
    """Counted read of a Hermitian source: upper triangle plus diagonal.

    The lower triangle is filled by conjugation, so an N x N read costs
    N(N+1)/2 calls, the same per-sweep price the evolution steps pay.
    """
    n = oracle.dim
    a = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        for k in range(j, n):
            v = oracle.query(j, k)
            a[j, k] = v
            a[k, j] = np.conj(v)
    return a


def oracle_from_generator(name: str, params: dict[str, str]) -> MatrixOracle:
    """Named built-in oracle sources for the command line.

    random-lowrank: n, r [, scale, seed]   seeded Hermitian rank-r ensemble
    all-ones:       n                      A[j,k] = 1 (the plain swap case)
    diagonal:       values=a;b;...         diagonal matrix
    """
    from .linalg import random_low_rank

    if name == "all-ones":
        n = int(params["n"])
        return MatrixOracle.from_matrix(np.ones((n, n), dtype=np.complex128))
    if name == "diagonal":
        vals = [float(v) for v in str(params["values"]).split(";")]
        return MatrixOracle.from_matrix(np.diag(np.array(vals, dtype=np.complex128)))
    if name == "random-lowrank":
        n = int(params["n"])
        r = int(params["r"])
        scale = float(params.get("scale", 1.0))
        seed = int(params.get("seed", 0))
        a = random_low_rank(n, r, scale, np.random.default_rng(seed))
        return MatrixOracle.from_matrix(a)
    raise ValueError(f"unknown generator '{name}'")


def hermitian_oracle(a) -> MatrixOracle:
    """Oracle over an explicitly Hermitized copy of a."""
    return MatrixOracle.from_matrix(hermitize(require_hermitian(a)))
