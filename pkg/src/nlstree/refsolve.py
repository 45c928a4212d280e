"""Independent Galerkin oracle: classic RK4 on the truncated mode system.

The truncated system keeps modes |n| <= N and projects the cubic term
back onto that box.  Four variants are integrated, selected by two flags:

  gauged:    evolve a_n (phases moved into the vector field) instead of
             the bare coefficients u_n with their stiff -1j*n^2 term;
  modified:  include the diagonal correction that removes the mean-field
             rotation (the starred sum minus |a_n|^2 a_n), or keep the
             plain full cubic sum.

The starred sum with its exclusions j != n, l != n is evaluated through
the exact index-set identity  star = full - 2*mu*a_n + |a_n|^2*a_n  with
mu = sum |a_m|^2; a literal triple-loop field is kept alongside and the
test suite checks the two agree, so the identity is verified rather than
assumed.
"""

from __future__ import annotations

import csv
import warnings as _warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .modes import ModeSequence, truncate
from .series import SeriesSolution


@dataclass(frozen=True)
class GalerkinSystem:
    """Mode cutoff, nonlinearity sign, and the gauge/modification flags."""

    n_cutoff: int
    omega: int = 1
    gauged: bool = True
    modified: bool = True

    def __post_init__(self):
        if self.n_cutoff < 0:
            raise ValidationError(f"cutoff must be >= 0, got {self.n_cutoff}")
        if self.omega not in (1, -1):
            raise ValidationError(f"omega must be +1 or -1, got {self.omega}")


@dataclass
class Trajectory:
    """States on a uniform time grid; states[i] is the mode vector at times[i]."""

    system: GalerkinSystem
    times: np.ndarray
    states: np.ndarray  # shape (steps+1, 2N+1), mode n at column n + N

    def at(self, t: float) -> ModeSequence:
        idx = self.index_of(t)
        N = self.system.n_cutoff
        row = self.states[idx]
        return ModeSequence.from_dict({n - N: row[n] for n in range(2 * N + 1)})

    def index_of(self, t: float) -> int:
        dt = self.times[1] - self.times[0] if len(self.times) > 1 else 1.0
        idx = round(t / dt) if len(self.times) > 1 else 0
        if not (0 <= idx < len(self.times)) or abs(self.times[idx] - t) > 1e-9:
            raise ValidationError(f"t={t} is not on the trajectory grid")
        return idx


def _cubic_full(w: np.ndarray) -> np.ndarray:
    """Boxed cubic convolution sum_(j-k+l=n) w_j conj(w_k) w_l for |n| <= N."""
    d = np.convolve(w, np.conj(w[::-1]))
    full = np.convolve(d, w)
    N = (len(w) - 1) // 2
    return full[2 * N : 4 * N + 1]


def _field(sys: GalerkinSystem, t: float, y: np.ndarray, nsq: np.ndarray) -> np.ndarray:
    if sys.gauged:
        w = y * np.exp(-1j * t * nsq)
        cubic = np.exp(1j * t * nsq) * _cubic_full(w)
    else:
        cubic = _cubic_full(y)
    if sys.modified:
        mu = float(np.sum((y * np.conj(y)).real))
        rhs = 1j * sys.omega * (cubic - 2.0 * mu * y)
    else:
        rhs = 1j * sys.omega * cubic
    if not sys.gauged:
        rhs = rhs - 1j * nsq * y
    return rhs


def _field_reference(sys: GalerkinSystem, t: float, y: np.ndarray) -> np.ndarray:
    """Literal triple-loop vector field with explicit starred exclusions.

    Slow; exists so the production field's index algebra is a tested fact.
    """
    N = sys.n_cutoff
    out = np.zeros_like(y)
    for n in range(-N, N + 1):
        acc = 0.0 + 0.0j
        for j in range(-N, N + 1):
            for l in range(-N, N + 1):
                k = j + l - n
                if abs(k) > N:
                    continue
                if sys.modified and (j == n or l == n):
                    continue
                term = y[j + N] * np.conj(y[k + N]) * y[l + N]
                if sys.gauged:
                    sigma = n * n - j * j + k * k - l * l
                    term *= np.exp(1j * sigma * t)
                acc += term
        if sys.modified:
            acc -= y[n + N] * np.conj(y[n + N]) * y[n + N]
        out[n + N] = 1j * sys.omega * acc
        if not sys.gauged:
            out[n + N] -= 1j * (n * n) * y[n + N]
    return out


def integrate(
    sys: GalerkinSystem, datum: ModeSequence, t_end: float, dt: float
) -> Trajectory:
    """Classic fourth-order Runge-Kutta on a uniform grid.

    The datum is truncated to the box.  Integrating the ungauged form
    requires dt <= 0.5/(N^2+1): the -1j*n^2 rotation is stiff.
    """
    if t_end <= 0 or dt <= 0:
        raise ValidationError("t_end and dt must be positive")
    if not sys.gauged and dt > 0.5 / (sys.n_cutoff**2 + 1):
        raise ValidationError(
            f"dt={dt} too large for the ungauged system at N={sys.n_cutoff}; "
            f"need dt <= {0.5 / (sys.n_cutoff**2 + 1):.3g}"
        )
    steps = round(t_end / dt)
    if steps < 1 or abs(steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValidationError("t_end must be an integer multiple of dt")

    N = sys.n_cutoff
    nsq = (np.arange(-N, N + 1) ** 2).astype(np.float64)
    x = truncate(datum, N)
    state = np.zeros(2 * N + 1, dtype=np.complex128)
    for n, v in x.items():
        state[n + N] = v

    times = dt * np.arange(steps + 1)
    states = np.empty((steps + 1, 2 * N + 1), dtype=np.complex128)
    states[0] = state
    for i in range(steps):
        t = times[i]
        k1 = _field(sys, t, state, nsq)
        k2 = _field(sys, t + dt / 2, state + dt / 2 * k1, nsq)
        k3 = _field(sys, t + dt / 2, state + dt / 2 * k2, nsq)
        k4 = _field(sys, t + dt, state + dt * k3, nsq)
        state = state + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        states[i + 1] = state
    return Trajectory(sys, times, states)


def write_trajectory_csv(
    path: str | Path, traj: Trajectory, times: tuple[float, ...] | None = None
) -> None:
    """Rows `t,n,re,im` sorted by (t, n); defaults to every grid time."""
    if times is None:
        times = tuple(float(t) for t in traj.times)
    N = traj.system.n_cutoff
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "n", "re", "im"])
        for t in times:
            row = traj.states[traj.index_of(t)]
            for n in range(-N, N + 1):
                v = row[n + N]
                writer.writerow([repr(float(t)), n, repr(v.real), repr(v.imag)])


def l2_invariant(traj: Trajectory) -> float:
    """Max deviation of sum |a_n(t)|^2 from its initial value over the grid."""
    energy = np.sum((traj.states * np.conj(traj.states)).real, axis=1)
    return float(np.max(np.abs(energy - energy[0])))


def gauge_relation(
    datum: ModeSequence,
    t_end: float,
    dt: float,
    omega: int = 1,
    n_cutoff: int | None = None,
) -> float:
    """Deviation between the plain and mean-field-corrected evolutions.

    Integrates the gauged system with and without the diagonal correction
    and checks  u_unmodified(t, n) = exp(2j*omega*mu*t) * u_modified(t, n)
    with mu = sum |u(0, n)|^2; returns the max modulus deviation over the
    grid and the box.
    """
    if n_cutoff is None:
        n_cutoff = datum.radius()
    x = truncate(datum, n_cutoff)
    mu = float(sum(abs(v) ** 2 for _, v in x.items()))
    traj_mod = integrate(GalerkinSystem(n_cutoff, omega, True, True), x, t_end, dt)
    traj_un = integrate(GalerkinSystem(n_cutoff, omega, True, False), x, t_end, dt)

    N = n_cutoff
    nsq = (np.arange(-N, N + 1) ** 2).astype(np.float64)
    worst = 0.0
    for i, t in enumerate(traj_mod.times):
        phys_mod = traj_mod.states[i] * np.exp(-1j * t * nsq)
        phys_un = traj_un.states[i] * np.exp(-1j * t * nsq)
        dev = np.abs(phys_un - np.exp(2j * omega * mu * t) * phys_mod)
        worst = max(worst, float(np.max(dev)))
    return worst


def compare_solutions(
    sol: SeriesSolution, sys: GalerkinSystem, dt: float
) -> dict[float, float]:
    """Sup-difference between the series and the Galerkin oracle per grid time.

    Warns when the oracle cutoff cannot hold every mode the series
    populates (degree K spreads a radius-R datum to (2K+1)*R).
    """
    needed = (2 * sol.max_degree + 1) * sol.datum.radius()
    if sys.n_cutoff < needed:
        _warnings.warn(
            f"oracle cutoff {sys.n_cutoff} below the series support bound {needed}; "
            "clipped modes will inflate the comparison",
            RuntimeWarning,
            stacklevel=2,
        )
    t_end = max(sol.times)
    if t_end <= 0:
        raise ValidationError("solution grid must reach a positive time")
    traj = integrate(sys, sol.datum, t_end, dt)

    N = sys.n_cutoff
    nsq = (np.arange(-N, N + 1) ** 2).astype(np.float64)
    out = {}
    for t in sol.times:
        series_val = sol.value(t)
        idx = traj.index_of(t)
        row = traj.states[idx]
        if not sys.gauged:
            row = row * np.exp(1j * t * nsq)  # convert u_n to gauged a_n
        diff = 0.0
        modes = set(series_val.indices) | set(range(-N, N + 1))
        for n in modes:
            oracle = row[n + N] if abs(n) <= N else 0.0
            diff = max(diff, abs(series_val.get(n) - oracle))
        out[t] = diff
    return out
