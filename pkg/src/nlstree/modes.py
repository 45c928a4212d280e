"""Sparse complex sequences over the integer mode lattice.

A ModeSequence holds finitely many gauged Fourier amplitudes a_n, stored
as (index, value) pairs with a strictly sorted support.  Values are
immutable after construction, so sequences can be shared freely.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import ValidationError

# Amplitudes below this modulus are dropped on normalization; far below
# every tolerance used anywhere in the test or acceptance suites.
DROP_TOL = 1e-300


@dataclass(frozen=True)
class SpaceParams:
    """Weighted summability exponents (s, p) of the sequence norm."""

    s: float
    p: float

    def __post_init__(self):
        if self.s < 0:
            raise ValidationError(f"smoothness weight s must be >= 0, got {self.s}")
        if not (1 <= self.p < math.inf):
            raise ValidationError(f"summability exponent p must be in [1, inf), got {self.p}")


@dataclass(frozen=True)
class ModeSequence:
    """Finitely supported map n -> complex amplitude."""

    indices: tuple[int, ...]
    values: tuple[complex, ...]

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValidationError("indices and values must have equal length")
        if any(a >= b for a, b in zip(self.indices, self.indices[1:])):
            raise ValidationError("support must be strictly sorted")
        if any(abs(v) <= DROP_TOL for v in self.values):
            raise ValidationError("zero amplitudes must be dropped before construction")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_dict(cls, data: Mapping[int, complex]) -> "ModeSequence":
        items = sorted((int(n), complex(v)) for n, v in data.items() if abs(v) > DROP_TOL)
        return cls(tuple(n for n, _ in items), tuple(v for _, v in items))

    @classmethod
    def from_items(cls, items: Iterable[tuple[int, complex]]) -> "ModeSequence":
        merged: dict[int, complex] = {}
        for n, v in items:
            merged[n] = merged.get(n, 0.0) + complex(v)
        return cls.from_dict(merged)

    @classmethod
    def zero(cls) -> "ModeSequence":
        return cls((), ())

    # -- access ------------------------------------------------------------

    def get(self, n: int) -> complex:
        lo, hi = 0, len(self.indices)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.indices[mid] < n:
                lo = mid + 1
            else:
                hi = mid
        if lo < len(self.indices) and self.indices[lo] == n:
            return self.values[lo]
        return 0.0 + 0.0j

    def items(self) -> Iterator[tuple[int, complex]]:
        return zip(self.indices, self.values)

    def to_dict(self) -> dict[int, complex]:
        return dict(self.items())

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def is_zero(self) -> bool:
        return not self.indices

    def radius(self) -> int:
        """Largest |n| in the support; 0 for the empty sequence."""
        if not self.indices:
            return 0
        return max(abs(self.indices[0]), abs(self.indices[-1]))

    # -- arithmetic --------------------------------------------------------

    def scaled(self, factor: complex) -> "ModeSequence":
        return ModeSequence.from_dict({n: factor * v for n, v in self.items()})

    def conjugated(self) -> "ModeSequence":
        return ModeSequence(self.indices, tuple(v.conjugate() for v in self.values))

    def __add__(self, other: "ModeSequence") -> "ModeSequence":
        out = dict(self.items())
        for n, v in other.items():
            out[n] = out.get(n, 0.0) + v
        return ModeSequence.from_dict(out)

    def __sub__(self, other: "ModeSequence") -> "ModeSequence":
        out = dict(self.items())
        for n, v in other.items():
            out[n] = out.get(n, 0.0) - v
        return ModeSequence.from_dict(out)

    # -- norms -------------------------------------------------------------

    def l1(self) -> float:
        return float(sum(abs(v) for v in self.values))

    def norm(self, sp: SpaceParams) -> float:
        return norm_lsp(self, sp)


def norm_lsp(x: ModeSequence, sp: SpaceParams) -> float:
    """Weighted p-norm  ( sum <n>^(p s) |x_n|^p )^(1/p),  <n> = sqrt(1+n^2)."""
    if x.is_zero:
        return 0.0
    total = 0.0
    for n, v in x.items():
        w = (1.0 + n * n) ** (sp.p * sp.s / 2.0)
        total += w * abs(v) ** sp.p
    return total ** (1.0 / sp.p)


def truncate(x: ModeSequence, n_cutoff: int) -> ModeSequence:
    """Keep modes with |n| <= n_cutoff, zero the rest."""
    if n_cutoff < 0:
        raise ValidationError(f"cutoff must be >= 0, got {n_cutoff}")
    return ModeSequence.from_dict({n: v for n, v in x.items() if abs(n) <= n_cutoff})


def random_datum(n_cutoff: int, decay: float, scale: float, rng_seed: int) -> ModeSequence:
    """Deterministic random sequence: modulus scale*<n>^(-decay), random phases.

    Supported on [-n_cutoff, n_cutoff]; the same seed always reproduces the
    same sequence.
    """
    if n_cutoff < 0:
        raise ValidationError(f"cutoff must be >= 0, got {n_cutoff}")
    if decay < 0:
        raise ValidationError(f"decay must be >= 0, got {decay}")
    rng = np.random.default_rng(rng_seed)
    data = {}
    for n in range(-n_cutoff, n_cutoff + 1):
        phase = rng.uniform(0.0, 2.0 * math.pi)
        modulus = scale * (1.0 + n * n) ** (-decay / 2.0)
        data[n] = modulus * complex(math.cos(phase), math.sin(phase))
    return ModeSequence.from_dict(data)


def sup_distance(a: ModeSequence, b: ModeSequence) -> float:
    """Max over n of |a_n - b_n|."""
    support = set(a.indices) | set(b.indices)
    return max((abs(a.get(n) - b.get(n)) for n in support), default=0.0)


# -- CSV serialization -----------------------------------------------------
# Rows `n,re,im` sorted by n under a `n,re,im` header.


def write_csv(x: ModeSequence, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "re", "im"])
        for n, v in x.items():
            writer.writerow([n, repr(v.real), repr(v.imag)])


def read_csv(path: str | Path) -> ModeSequence:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["n", "re", "im"]:
            raise ValidationError(f"unexpected CSV header {header!r} in {path}")
        data = {}
        for row in reader:
            if not row:
                continue
            n, re, im = int(row[0]), float(row[1]), float(row[2])
            data[n] = complex(re, im)
    return ModeSequence.from_dict(data)
