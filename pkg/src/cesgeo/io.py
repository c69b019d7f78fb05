"""File formats: matrices, sample batches, configs, result tables.

Matrix and batch files are self-describing text: a header line (``hpd p`` or
``batch p n``) followed by rows of whitespace-separated ``re im`` pairs, one
matrix row (or sample) per line.  Floats are written with ``repr`` so files
round-trip bit-exactly.  A matrix file may contain several ``hpd`` blocks.

Configs are flat ``key = value`` text with ``#`` comments; unknown keys are
rejected by the consumer.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import CesGeoError, FileFormatError
from .linalg import validate_hpd

CSV_HEADER = (
    "experiment",
    "estimator",
    "n",
    "distance",
    "mean_sq_dist",
    "std_err",
    "bound",
    "trials",
    "failures",
)


def _format_complex_row(row: np.ndarray) -> str:
    return " ".join(f"{repr(float(z.real))} {repr(float(z.imag))}" for z in row)


def _parse_complex_row(line: str, width: int, where: str) -> np.ndarray:
    parts = line.split()
    if len(parts) != 2 * width:
        raise FileFormatError(
            f"{where}: expected {2 * width} numbers ({width} re/im pairs), got {len(parts)}"
        )
    try:
        vals = [float(x) for x in parts]
    except ValueError as exc:
        raise FileFormatError(f"{where}: {exc}") from exc
    v = np.asarray(vals).reshape(width, 2)
    return v[:, 0] + 1j * v[:, 1]


def _data_lines(text: str) -> list[str]:
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def write_hpd_matrices(path, mats) -> None:
    """Write one or more HPD matrices as consecutive ``hpd p`` blocks."""
    blocks = []
    for M in mats:
        M = validate_hpd(M)
        p = M.shape[0]
        blocks.append(f"hpd {p}")
        blocks.extend(_format_complex_row(M[i]) for i in range(p))
    with open(path, "w") as fh:
        fh.write("\n".join(blocks) + "\n")


def read_hpd_matrices(path) -> list[np.ndarray]:
    """Parse every ``hpd`` block; identifies the offending block on failure."""
    with open(path) as fh:
        lines = _data_lines(fh.read())
    mats: list[np.ndarray] = []
    i = 0
    while i < len(lines):
        head = lines[i].split()
        if len(head) != 2 or head[0] != "hpd":
            raise FileFormatError(f"{path}: expected 'hpd p' header, got {lines[i]!r}")
        try:
            p = int(head[1])
        except ValueError as exc:
            raise FileFormatError(f"{path}: bad dimension in {lines[i]!r}") from exc
        if p < 1:
            raise FileFormatError(f"{path}: dimension must be >= 1, got {p}")
        if i + 1 + p > len(lines):
            raise FileFormatError(f"{path}: matrix {len(mats)} truncated (needs {p} rows)")
        rows = [
            _parse_complex_row(lines[i + 1 + r], p, f"{path}: matrix {len(mats)} row {r}")
            for r in range(p)
        ]
        try:
            mats.append(validate_hpd(np.stack(rows)))
        except CesGeoError as exc:
            raise FileFormatError(f"{path}: matrix {len(mats)} is not HPD: {exc}") from exc
        i += 1 + p
    if not mats:
        raise FileFormatError(f"{path}: no 'hpd' blocks found")
    return mats


def write_batch(path, samples: np.ndarray) -> None:
    """Write an (n, p) complex sample array under a ``batch p n`` header."""
    samples = np.asarray(samples, dtype=complex)
    n, p = samples.shape
    with open(path, "w") as fh:
        fh.write(f"batch {p} {n}\n")
        for i in range(n):
            fh.write(_format_complex_row(samples[i]) + "\n")


def read_batch(path) -> np.ndarray:
    """Parse a ``batch p n`` file into an (n, p) complex array."""
    with open(path) as fh:
        lines = _data_lines(fh.read())
    if not lines:
        raise FileFormatError(f"{path}: empty file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "batch":
        raise FileFormatError(f"{path}: expected 'batch p n' header, got {lines[0]!r}")
    try:
        p, n = int(head[1]), int(head[2])
    except ValueError as exc:
        raise FileFormatError(f"{path}: bad header {lines[0]!r}") from exc
    if p < 1 or n < 1:
        raise FileFormatError(f"{path}: p and n must be >= 1, got p={p} n={n}")
    if len(lines) - 1 != n:
        raise FileFormatError(f"{path}: expected {n} sample rows, found {len(lines) - 1}")
    rows = [_parse_complex_row(lines[1 + i], p, f"{path}: sample {i}") for i in range(n)]
    return np.stack(rows)


def parse_config(path) -> dict[str, str]:
    """Flat ``key = value`` parser; duplicate keys are errors, values stay strings."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FileFormatError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key or not value:
                raise FileFormatError(f"{path}:{lineno}: empty key or value")
            if key in out:
                raise FileFormatError(f"{path}:{lineno}: duplicate key {key!r}")
            out[key] = value
    return out


@dataclass(frozen=True)
class ResultRow:
    """One CSV record of the experiment output table."""

    experiment: str
    estimator: str
    n: int
    distance: str
    mean_sq_dist: float
    std_err: float
    bound: float
    trials: int
    failures: int


def write_result_csv(path, rows) -> None:
    """Single-writer CSV emission with the fixed schema; floats via repr."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.experiment,
                    r.estimator,
                    r.n,
                    r.distance,
                    repr(float(r.mean_sq_dist)),
                    repr(float(r.std_err)),
                    repr(float(r.bound)),
                    r.trials,
                    r.failures,
                ]
            )
