"""Run configuration: plain-text key = value sections, lossless round-trip.

The canonical file form groups keys into one section per concern; every
value is typed and validated on load, and to_text() regenerates the exact
canonical text, so a config embedded in a run manifest reproduces the run.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ValidationError
from .modes import ModeSequence, random_datum


@dataclass(frozen=True)
class CapsConfig:
    tree_degree: int = 6
    enumeration_limit: int = 200_000
    assignment_budget: int = 2_000_000
    exppoly_terms: int = 1_000_000
    eps_sum: int = 20_000

    def validate(self):
        for f in fields(self):
            if getattr(self, f.name) < 1:
                raise ValidationError(f"caps.{f.name} must be >= 1")


@dataclass(frozen=True)
class DatumConfig:
    source: str = "random"  # random | single_mode | zero
    support: int = 2
    decay: float = 1.0
    scale: float = 0.1
    l1_target: float = 0.0  # > 0 rescales the random datum to this l1 norm
    amplitude: float = 0.5  # single_mode modulus
    mode: int = 0  # single_mode index

    def validate(self):
        if self.source not in ("random", "single_mode", "zero"):
            raise ValidationError(f"datum.source must be random|single_mode|zero, got {self.source!r}")
        if self.support < 0:
            raise ValidationError("datum.support must be >= 0")
        if self.decay < 0:
            raise ValidationError("datum.decay must be >= 0")
        if self.l1_target < 0:
            raise ValidationError("datum.l1_target must be >= 0")


@dataclass(frozen=True)
class RunConfig:
    # [run]
    seed: int = 7
    out_dir: str = "out"
    cache_dir: str = "cache"
    # [equation]
    omega: int = 1
    n_cutoff: int = 3
    # [space]
    s: float = 0.0
    p: float = 4.0
    q: float = 2.0
    # [series]
    max_degree: int = 4
    tau: float = 0.5
    grid_points: int = 6
    convergence_threshold: float = 0.2
    # [frozen]
    c0: float = 0.25
    delta: float = 0.1
    # [oracle]
    dt: float = 1e-3
    galerkin_cutoff: int = 0  # 0 = derive (2K+1) * datum support radius
    # [diagnose]
    truncation_list: tuple[int, ...] = (2, 4, 8)
    gap_times: tuple[float, ...] = (0.001, 0.003, 0.01, 0.03, 0.1)
    divisor_limit: int = 10_000
    # [caps], [datum]
    caps: CapsConfig = field(default_factory=CapsConfig)
    datum: DatumConfig = field(default_factory=DatumConfig)

    def validate(self) -> "RunConfig":
        if self.omega not in (1, -1):
            raise ValidationError(f"equation.omega must be 1 or -1, got {self.omega}")
        if self.n_cutoff < 0:
            raise ValidationError("equation.n_cutoff must be >= 0")
        if self.s < 0:
            raise ValidationError("space.s must be >= 0")
        if not (1 <= self.p):
            raise ValidationError("space.p must be >= 1")
        if not (1 <= self.q):
            raise ValidationError("space.q must be >= 1")
        if self.max_degree < 0:
            raise ValidationError("series.max_degree must be >= 0")
        if self.tau <= 0:
            raise ValidationError("series.tau must be > 0")
        if self.grid_points < 2:
            raise ValidationError("series.grid_points must be >= 2")
        if not (0 < self.c0 <= 0.25):
            raise ValidationError("frozen.c0 must lie in (0, 0.25]")
        if not (0 < self.delta < 1):
            raise ValidationError("frozen.delta must lie in (0, 1)")
        if self.dt <= 0:
            raise ValidationError("oracle.dt must be > 0")
        if self.galerkin_cutoff < 0:
            raise ValidationError("oracle.galerkin_cutoff must be >= 0")
        if any(b <= a for a, b in zip(self.truncation_list, self.truncation_list[1:])):
            raise ValidationError("diagnose.truncation_list must be strictly increasing")
        if any(t <= 0 for t in self.gap_times):
            raise ValidationError("diagnose.gap_times must be positive")
        if self.divisor_limit < 1:
            raise ValidationError("diagnose.divisor_limit must be >= 1")
        self.caps.validate()
        self.datum.validate()
        return self

    # -- canonical text form -------------------------------------------------

    def to_text(self) -> str:
        out = io.StringIO()
        out.write("[run]\n")
        out.write(f"seed = {self.seed}\n")
        out.write(f"out_dir = {self.out_dir}\n")
        out.write(f"cache_dir = {self.cache_dir}\n")
        out.write("\n[equation]\n")
        out.write(f"omega = {self.omega}\n")
        out.write(f"n_cutoff = {self.n_cutoff}\n")
        out.write("\n[space]\n")
        out.write(f"s = {self.s!r}\n")
        out.write(f"p = {self.p!r}\n")
        out.write(f"q = {self.q!r}\n")
        out.write("\n[series]\n")
        out.write(f"max_degree = {self.max_degree}\n")
        out.write(f"tau = {self.tau!r}\n")
        out.write(f"grid_points = {self.grid_points}\n")
        out.write(f"convergence_threshold = {self.convergence_threshold!r}\n")
        out.write("\n[frozen]\n")
        out.write(f"c0 = {self.c0!r}\n")
        out.write(f"delta = {self.delta!r}\n")
        out.write("\n[oracle]\n")
        out.write(f"dt = {self.dt!r}\n")
        out.write(f"galerkin_cutoff = {self.galerkin_cutoff}\n")
        out.write("\n[diagnose]\n")
        out.write(f"truncation_list = {','.join(str(n) for n in self.truncation_list)}\n")
        out.write(f"gap_times = {','.join(repr(t) for t in self.gap_times)}\n")
        out.write(f"divisor_limit = {self.divisor_limit}\n")
        out.write("\n[caps]\n")
        out.write(f"tree_degree = {self.caps.tree_degree}\n")
        out.write(f"enumeration_limit = {self.caps.enumeration_limit}\n")
        out.write(f"assignment_budget = {self.caps.assignment_budget}\n")
        out.write(f"exppoly_terms = {self.caps.exppoly_terms}\n")
        out.write(f"eps_sum = {self.caps.eps_sum}\n")
        out.write("\n[datum]\n")
        out.write(f"source = {self.datum.source}\n")
        out.write(f"support = {self.datum.support}\n")
        out.write(f"decay = {self.datum.decay!r}\n")
        out.write(f"scale = {self.datum.scale!r}\n")
        out.write(f"l1_target = {self.datum.l1_target!r}\n")
        out.write(f"amplitude = {self.datum.amplitude!r}\n")
        out.write(f"mode = {self.datum.mode}\n")
        return out.getvalue()

    def to_file(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ValidationError(f"bad config syntax: {exc}") from exc

        def get(section, key, conv, default):
            if parser.has_option(section, key):
                raw = parser.get(section, key)
                try:
                    return conv(raw)
                except ValueError as exc:
                    raise ValidationError(f"bad value for {section}.{key}: {raw!r}") from exc
            return default

        def int_list(raw: str) -> tuple[int, ...]:
            return tuple(int(x) for x in raw.split(",") if x.strip())

        def float_list(raw: str) -> tuple[float, ...]:
            return tuple(float(x) for x in raw.split(",") if x.strip())

        base = cls()
        cfg = cls(
            seed=get("run", "seed", int, base.seed),
            out_dir=get("run", "out_dir", str, base.out_dir),
            cache_dir=get("run", "cache_dir", str, base.cache_dir),
            omega=get("equation", "omega", int, base.omega),
            n_cutoff=get("equation", "n_cutoff", int, base.n_cutoff),
            s=get("space", "s", float, base.s),
            p=get("space", "p", float, base.p),
            q=get("space", "q", float, base.q),
            max_degree=get("series", "max_degree", int, base.max_degree),
            tau=get("series", "tau", float, base.tau),
            grid_points=get("series", "grid_points", int, base.grid_points),
            convergence_threshold=get(
                "series", "convergence_threshold", float, base.convergence_threshold
            ),
            c0=get("frozen", "c0", float, base.c0),
            delta=get("frozen", "delta", float, base.delta),
            dt=get("oracle", "dt", float, base.dt),
            galerkin_cutoff=get("oracle", "galerkin_cutoff", int, base.galerkin_cutoff),
            truncation_list=get("diagnose", "truncation_list", int_list, base.truncation_list),
            gap_times=get("diagnose", "gap_times", float_list, base.gap_times),
            divisor_limit=get("diagnose", "divisor_limit", int, base.divisor_limit),
            caps=CapsConfig(
                tree_degree=get("caps", "tree_degree", int, base.caps.tree_degree),
                enumeration_limit=get(
                    "caps", "enumeration_limit", int, base.caps.enumeration_limit
                ),
                assignment_budget=get(
                    "caps", "assignment_budget", int, base.caps.assignment_budget
                ),
                exppoly_terms=get("caps", "exppoly_terms", int, base.caps.exppoly_terms),
                eps_sum=get("caps", "eps_sum", int, base.caps.eps_sum),
            ),
            datum=DatumConfig(
                source=get("datum", "source", str, base.datum.source),
                support=get("datum", "support", int, base.datum.support),
                decay=get("datum", "decay", float, base.datum.decay),
                scale=get("datum", "scale", float, base.datum.scale),
                l1_target=get("datum", "l1_target", float, base.datum.l1_target),
                amplitude=get("datum", "amplitude", float, base.datum.amplitude),
                mode=get("datum", "mode", int, base.datum.mode),
            ),
        )
        return cfg.validate()

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise ValidationError(f"config file not found: {path}")
        return cls.from_text(path.read_text())

    # -- derived objects ------------------------------------------------------

    def build_datum(self) -> ModeSequence:
        d = self.datum
        if d.source == "zero":
            return ModeSequence.zero()
        if d.source == "single_mode":
            return ModeSequence.from_dict({d.mode: d.amplitude})
        x = random_datum(d.support, d.decay, d.scale, self.seed)
        if d.l1_target > 0 and not x.is_zero:
            x = x.scaled(d.l1_target / x.l1())
        return x

    def time_grid(self) -> tuple[float, ...]:
        n = self.grid_points
        return tuple(self.tau * i / (n - 1) for i in range(n))

    def oracle_cutoff(self, datum: ModeSequence) -> int:
        if self.galerkin_cutoff > 0:
            return self.galerkin_cutoff
        return max(1, (2 * self.max_degree + 1) * datum.radius())
