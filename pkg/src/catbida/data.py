"""Integer-coded categorical datasets and the shared mixed-radix indexing.

A dataset is an N x n matrix of codes 0..r_i-1 plus the per-variable
cardinalities. On disk it is a CSV with a header row of variable names and a
sidecar ``<stem>.cards.json`` holding the cardinality list; without the
sidecar, cardinalities are inferred as max code + 1 (the sidecar wins).

Configuration indexing convention, used for every table keyed by a set of
variables (CPT rows, count tables, backdoor z-cells): members are taken in
ascending node order and the lowest-indexed member is the fastest-varying
digit, i.e. index = sum_t code_t * prod_{s<t} r_s.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


def config_count(cards: Sequence[int]) -> int:
    """Number of joint configurations of the given cardinalities (1 if empty)."""
    return math.prod(int(c) for c in cards)


def config_strides(cards: Sequence[int]) -> np.ndarray:
    """Mixed-radix strides, lowest-indexed member fastest-varying."""
    strides = np.ones(len(cards), dtype=np.int64)
    for t in range(1, len(cards)):
        strides[t] = strides[t - 1] * int(cards[t - 1])
    return strides


def config_index(codes: np.ndarray, cards: Sequence[int]) -> np.ndarray:
    """Map rows of codes (columns in ascending node order) to flat indices."""
    codes = np.asarray(codes, dtype=np.int64)
    if codes.ndim == 1:
        codes = codes[None, :]
        return (codes @ config_strides(cards))[0]
    if codes.shape[1] == 0:
        return np.zeros(codes.shape[0], dtype=np.int64)
    return codes @ config_strides(cards)


def unrank_config(index: int, cards: Sequence[int]) -> tuple[int, ...]:
    """Inverse of config_index for a single flat index."""
    out = []
    for c in cards:
        out.append(int(index % c))
        index //= c
    return tuple(out)


@dataclass
class Dataset:
    """Categorical sample matrix with declared cardinalities."""

    codes: np.ndarray
    cards: tuple[int, ...]
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=np.int64)
        if codes.ndim != 2:
            raise ValueError("codes must be a 2-D matrix")
        self.codes = codes
        self.cards = tuple(int(c) for c in self.cards)
        if codes.shape[1] != len(self.cards):
            raise ValueError("cards length must match column count")
        if any(c < 1 for c in self.cards):
            raise ValueError("cardinalities must be >= 1")
        if not self.names:
            self.names = tuple(f"x{i}" for i in range(len(self.cards)))
        elif len(self.names) != len(self.cards):
            raise ValueError("names length must match column count")
        if codes.size:
            if codes.min() < 0:
                raise ValueError("negative code in data")
            over = codes.max(axis=0) >= np.asarray(self.cards)
            if over.any():
                bad = int(np.nonzero(over)[0][0])
                raise ValueError(f"code out of range in column {bad}")

    @property
    def n_samples(self) -> int:
        return self.codes.shape[0]

    @property
    def n_vars(self) -> int:
        return self.codes.shape[1]

    def column(self, i: int) -> np.ndarray:
        return self.codes[:, i]

    def permute_columns(self, perm: Sequence[int]) -> "Dataset":
        """Reorder variables; perm[k] is the old index placed at position k."""
        perm = list(perm)
        return Dataset(
            self.codes[:, perm],
            tuple(self.cards[p] for p in perm),
            tuple(self.names[p] for p in perm),
        )

    def to_csv(self, path: str | Path, sidecar: bool = True) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.names)
            writer.writerows(self.codes.tolist())
        if sidecar:
            sidecar_path(path).write_text(json.dumps(list(self.cards)))

    @classmethod
    def from_csv(cls, path: str | Path, cards: Sequence[int] | None = None) -> "Dataset":
        path = Path(path)
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            names = tuple(next(reader))
            rows = [[int(v) for v in row] for row in reader if row]
        codes = np.asarray(rows, dtype=np.int64).reshape(len(rows), len(names))
        if cards is None:
            side = sidecar_path(path)
            if side.exists():
                cards = json.loads(side.read_text())
            else:
                # max+1 fallback; at least 1 so empty columns stay valid
                cards = (codes.max(axis=0) + 1).tolist() if len(rows) else [1] * len(names)
        return cls(codes, tuple(int(c) for c in cards), names)


def sidecar_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".cards.json")
