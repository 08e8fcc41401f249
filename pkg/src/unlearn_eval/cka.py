"""Linear centered kernel alignment between row-aligned embedding matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .languages import LanguageTag


class DegenerateInputError(ValueError):
    """A matrix is all-zero after column centering."""


@dataclass(frozen=True)
class EmbeddingMatrix:
    values: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"{self.label or 'matrix'}: expected 2-D array, got shape {arr.shape}")
        if arr.shape[0] < 2 or arr.shape[1] < 1:
            raise ValueError(f"{self.label or 'matrix'}: need n >= 2 rows and d >= 1 columns, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{self.label or 'matrix'}: contains non-finite values")
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def _as_array(m: EmbeddingMatrix | np.ndarray) -> np.ndarray:
    return m.values if isinstance(m, EmbeddingMatrix) else EmbeddingMatrix(m).values


def linear_cka(x: EmbeddingMatrix | np.ndarray, y: EmbeddingMatrix | np.ndarray) -> float:
    """``||Yc^T Xc||_F^2 / (||Xc^T Xc||_F * ||Yc^T Yc||_F)`` on column-centered inputs.

    Uses the d-by-d cross products, so memory grows with the embedding width
    rather than the number of sentences.
    """
    xa, ya = _as_array(x), _as_array(y)
    if xa.shape[0] != ya.shape[0]:
        raise ValueError(f"row mismatch: {xa.shape[0]} vs {ya.shape[0]}")
    xc = xa - xa.mean(axis=0)
    yc = ya - ya.mean(axis=0)
    # relative threshold: centering leaves rounding noise on constant columns
    for name, raw, c in (("x", xa, xc), ("y", ya, yc)):
        if not np.any(np.abs(c) > 1e-12 * max(1.0, float(np.abs(raw).max()))):
            raise DegenerateInputError(f"{name} is all-zero after centering")
    cross = np.linalg.norm(yc.T @ xc, "fro") ** 2
    denom = np.linalg.norm(xc.T @ xc, "fro") * np.linalg.norm(yc.T @ yc, "fro")
    return float(cross / denom)


def read_matrix(path: str | Path, label: str | None = None) -> EmbeddingMatrix:
    """Read a text matrix: header line ``n d`` then n rows of d numbers (spaces or commas)."""
    path = Path(path)
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = lines[0].replace(",", " ").split()
    if len(header) != 2:
        raise ValueError(f"{path}:1: header must be 'n d'")
    try:
        n, d = int(header[0]), int(header[1])
    except ValueError:
        raise ValueError(f"{path}:1: header must hold two integers") from None
    rows = lines[1:]
    if len(rows) != n:
        raise ValueError(f"{path}: header says {n} rows, found {len(rows)}")
    data = np.empty((n, d), dtype=np.float64)
    for i, line in enumerate(rows):
        parts = line.replace(",", " ").split()
        if len(parts) != d:
            raise ValueError(f"{path}:{i + 2}: expected {d} values, found {len(parts)}")
        try:
            data[i] = [float(p) for p in parts]
        except ValueError:
            raise ValueError(f"{path}:{i + 2}: non-numeric value") from None
    return EmbeddingMatrix(data, label or path.stem)


def write_matrix(path: str | Path, matrix: EmbeddingMatrix | np.ndarray) -> None:
    arr = _as_array(matrix)
    lines = [f"{arr.shape[0]} {arr.shape[1]}"]
    lines.extend(" ".join(repr(float(v)) for v in row) for row in arr)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


MATRIX_SUFFIXES = (".txt", ".csv", ".tsv", ".mat")


def find_matrices(matrix_dir: str | Path) -> dict[str, Path]:
    """Map language code to file, taking the stem of each matrix file as its language."""
    out: dict[str, Path] = {}
    for p in sorted(Path(matrix_dir).iterdir()):
        if p.is_file() and p.suffix in MATRIX_SUFFIXES:
            if p.stem in out:
                raise ValueError(f"two matrix files for language {p.stem!r}")
            out[p.stem] = p
    return out


@dataclass(frozen=True)
class CKATable:
    base: str
    cells: Mapping[str, float]

    @property
    def avg(self) -> float:
        return math.fsum(self.cells.values()) / len(self.cells) if self.cells else float("nan")


def cka_table(matrix_dir: str | Path, base_lang: LanguageTag | str = LanguageTag.EN) -> CKATable:
    """CKA of every language's matrix against the base language's matrix."""
    base = LanguageTag(base_lang).value if isinstance(base_lang, LanguageTag) else str(base_lang)
    files = find_matrices(matrix_dir)
    if base not in files:
        raise FileNotFoundError(f"no matrix file for base language {base!r} in {matrix_dir}")
    x = read_matrix(files[base])
    cells = {lang: linear_cka(x, read_matrix(p)) for lang, p in files.items() if lang != base}
    return CKATable(base, cells)
