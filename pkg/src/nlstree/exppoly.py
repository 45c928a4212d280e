"""Exact algebra of exponential polynomials in one real variable.

An ExpPoly is a finite sum

    f(t) = sum_i  c_i * t**p_i * exp(1j * theta_i * t)

with complex coefficients c_i, integer powers p_i >= 0 and *integer*
phases theta_i.  Every oscillation phase produced by the mode recursion
is an integer, so the class is closed under products, primitives and
derivatives, and resonant (theta == 0) terms are recognised by exact
integer comparison instead of thresholding.  Only the coefficients live
in floating point; powers and phases never round.
"""

from __future__ import annotations

import cmath
from typing import Iterable, Iterator, Mapping, Tuple

import numpy as np

from .errors import BudgetExceededError

Key = Tuple[int, int]  # (power, phase)

# Hard ceiling on stored terms.  Deep recursions with many distinct phases
# grow multiplicatively and must fail loudly rather than thrash.
TERM_CAP = 1_000_000

# Coefficients below this modulus are numerical dust and are dropped.
DROP_TOL = 1e-300


def _normalize(terms: dict) -> dict:
    out = {}
    for key, c in terms.items():
        p, theta = key
        if not (isinstance(p, int) and isinstance(theta, int)):
            raise TypeError(f"powers and phases must be int, got {key!r}")
        if p < 0:
            raise ValueError(f"negative power in term {key!r}")
        c = complex(c)
        if abs(c) > DROP_TOL:
            out[key] = c
    if len(out) > TERM_CAP:
        raise BudgetExceededError(
            f"exponential polynomial has {len(out)} terms (cap {TERM_CAP})"
        )
    return out


class ExpPoly:
    """Finite sum of terms  c * t**p * exp(1j*theta*t).  Treated as immutable."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Key, complex] | Iterable[tuple[Key, complex]] = ()):
        self._terms = _normalize(dict(terms))

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, c: complex) -> "ExpPoly":
        return cls({(0, 0): c})

    @classmethod
    def term(cls, c: complex, power: int = 0, phase: int = 0) -> "ExpPoly":
        return cls({(power, phase): c})

    # -- inspection --------------------------------------------------------

    def items(self) -> Iterator[tuple[Key, complex]]:
        return iter(self._terms.items())

    def term_dict(self) -> dict:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def max_power(self) -> int:
        return max((p for p, _ in self._terms), default=0)

    def max_abs_phase(self) -> int:
        return max((abs(th) for _, th in self._terms), default=0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def isclose(self, other: "ExpPoly", tol: float = 1e-12) -> bool:
        keys = set(self._terms) | set(other._terms)
        scale = max(
            [1.0]
            + [abs(c) for c in self._terms.values()]
            + [abs(c) for c in other._terms.values()]
        )
        return all(
            abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) <= tol * scale
            for k in keys
        )

    def __repr__(self) -> str:
        if not self._terms:
            return "ExpPoly(0)"
        bits = [
            f"({c:.6g})*t^{p}*e^{{{th}it}}"
            for (p, th), c in sorted(self._terms.items())
        ]
        return "ExpPoly(" + " + ".join(bits) + ")"

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        if not isinstance(other, ExpPoly):
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0.0) + c
        return ExpPoly(out)

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        if not isinstance(other, ExpPoly):
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0.0) - c
        return ExpPoly(out)

    def __neg__(self) -> "ExpPoly":
        return ExpPoly({k: -c for k, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, ExpPoly):
            out: dict = {}
            for (p1, t1), c1 in self._terms.items():
                for (p2, t2), c2 in other._terms.items():
                    key = (p1 + p2, t1 + t2)
                    out[key] = out.get(key, 0.0) + c1 * c2
            return ExpPoly(out)
        return ExpPoly({k: other * c for k, c in self._terms.items()})

    __rmul__ = __mul__

    def conjugate(self) -> "ExpPoly":
        """Complex conjugate; real t makes this (c, p, theta) -> (c*, p, -theta)."""
        return ExpPoly({(p, -th): c.conjugate() for (p, th), c in self._terms.items()})

    def phase_shifted(self, dtheta: int) -> "ExpPoly":
        """Multiply by exp(1j*dtheta*t)."""
        if dtheta == 0:
            return self
        return ExpPoly({(p, th + dtheta): c for (p, th), c in self._terms.items()})

    # -- calculus ----------------------------------------------------------

    def integrate(self) -> "ExpPoly":
        """Exact primitive vanishing at 0.

        Resonant terms integrate to t**(p+1)/(p+1); oscillatory terms via
        repeated integration by parts, which yields p+1 oscillatory terms
        plus one constant correction keeping the value 0 at t = 0.
        """
        out: dict = {}
        for (p, theta), c in self._terms.items():
            _integrate_term_into(out, c, p, theta)
        return ExpPoly(out)

    def differentiate(self) -> "ExpPoly":
        out: dict = {}
        for (p, theta), c in self._terms.items():
            if p > 0:
                key = (p - 1, theta)
                out[key] = out.get(key, 0.0) + c * p
            if theta != 0:
                key = (p, theta)
                out[key] = out.get(key, 0.0) + c * (1j * theta)
        return ExpPoly(out)

    # -- evaluation --------------------------------------------------------

    def value(self, t: float) -> complex:
        total = 0.0 + 0.0j
        for (p, theta), c in self._terms.items():
            term = c
            if p:
                term = term * t**p
            if theta:
                term = term * cmath.exp(1j * theta * t)
            total += term
        return total

    def values(self, ts: np.ndarray) -> np.ndarray:
        """Vectorised evaluation on an array of times."""
        total = np.zeros(len(ts), dtype=np.complex128)
        for (p, theta), c in self._terms.items():
            term = np.full(len(ts), c, dtype=np.complex128)
            if p:
                term = term * ts**p
            if theta:
                term = term * np.exp(1j * theta * ts)
            total += term
        return total


def _integrate_term_into(out: dict, c: complex, p: int, theta: int) -> None:
    """Accumulate the primitive of c*t**p*exp(1j*theta*t) into a term dict."""
    if theta == 0:
        key = (p + 1, 0)
        out[key] = out.get(key, 0.0) + c / (p + 1)
        return
    d = 1j * theta
    coef = c
    q = p
    while q > 0:
        key = (q, theta)
        out[key] = out.get(key, 0.0) + coef / d
        coef = -coef * q / d
        q -= 1
    key = (0, theta)
    out[key] = out.get(key, 0.0) + coef / d
    key = (0, 0)
    out[key] = out.get(key, 0.0) - coef / d


# -- raw term-dict kernels ---------------------------------------------------
# Hot loops in the mode recursion and the tree operators work on plain
# {(power, phase): coeff} dicts and only wrap them in ExpPoly at module
# boundaries.  These helpers are the shared kernels.


def mul_terms(a: Mapping[Key, complex], b: Mapping[Key, complex]) -> dict:
    out: dict = {}
    for (p1, t1), c1 in a.items():
        for (p2, t2), c2 in b.items():
            key = (p1 + p2, t1 + t2)
            out[key] = out.get(key, 0.0) + c1 * c2
    return out


def mul_accumulate(
    out: dict, a: Mapping[Key, complex], b: Mapping[Key, complex], phase: int, scale: complex
) -> None:
    """out += scale * a * b * exp(1j*phase*t), all raw term dicts."""
    for (p1, t1), c1 in a.items():
        for (p2, t2), c2 in b.items():
            key = (p1 + p2, t1 + t2 + phase)
            out[key] = out.get(key, 0.0) + scale * c1 * c2


def conj_terms(a: Mapping[Key, complex]) -> dict:
    return {(p, -th): c.conjugate() for (p, th), c in a.items()}


def integral_power_phase(p: int, theta: int, t: float) -> complex:
    """Closed-form value of the integral of s**p * exp(1j*theta*s) over [0, t]."""
    if theta == 0:
        return complex(t ** (p + 1) / (p + 1))
    d = 1j * theta
    eit = cmath.exp(1j * theta * t)
    coef = 1.0 + 0.0j
    total = 0.0 + 0.0j
    q = p
    while q > 0:
        total += (coef / d) * t**q * eit
        coef = -coef * q / d
        q -= 1
    total += (coef / d) * eit
    total -= coef / d
    return total


ZERO = ExpPoly()
ONE = ExpPoly.constant(1.0)
