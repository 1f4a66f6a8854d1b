"""Matrix and state file round-trip.

Two formats, both exact round-trip (Python's shortest-repr float
serialization is bit-faithful for doubles):

* JSON: {"rows": M, "cols": N, "data": [[re, im], ...]} with data a flat
  row-major list of M*N [re, im] pairs.
* CSV: M rows of N cells, each cell the string "re,im" (quoted by the csv
  module because of the embedded comma).

States are stored as single-column matrices.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .linalg import as_matrix


def matrix_to_json_obj(a) -> dict:
    a = as_matrix(a)
    m, n = a.shape
    flat = a.reshape(-1)
    return {
        "rows": m,
        "cols": n,
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json_obj(obj: dict) -> np.ndarray:
    m, n = int(obj["rows"]), int(obj["cols"])
    data = obj["data"]
    if len(data) != m * n:
        raise ValueError(f"data length {len(data)} != rows*cols = {m * n}")
    flat = np.array([complex(re, im) for re, im in data], dtype=np.complex128)
    return flat.reshape(m, n)


def save_matrix(path, a) -> None:
    """Write a matrix file; format chosen by extension (.csv, else JSON)."""
    path = Path(path)
    a = as_matrix(a)
    if path.suffix.lower() == ".csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            for row in a:
                writer.writerow([f"{float(z.real)!r},{float(z.imag)!r}" for z in row])
    else:
        path.write_text(json.dumps(matrix_to_json_obj(a), sort_keys=True) + "\n")


def load_matrix(path) -> np.ndarray:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        rows = []
        with path.open(newline="") as fh:
            for record in csv.reader(fh):
                rows.append([complex(*map(float, cell.split(","))) for cell in record])
        if not rows:
            raise ValueError(f"empty matrix file: {path}")
        return np.array(rows, dtype=np.complex128)
    obj = json.loads(path.read_text())
    return matrix_from_json_obj(obj)


def load_state(path) -> np.ndarray:
    """Load a pure state stored as a single-column (or single-row) matrix."""
    a = load_matrix(path)
    if 1 not in a.shape:
        raise ValueError(f"state file must be a vector, got shape {a.shape}")
    psi = a.reshape(-1)
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise ValueError("state file holds the zero vector")
    return psi / nrm


def save_state(path, psi) -> None:
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1, 1)
    save_matrix(path, psi)
