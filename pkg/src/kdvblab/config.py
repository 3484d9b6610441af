"""Flat key-value run configuration.

Grammar: one ``key = value`` pair per line, ``#`` starts a comment, blank
lines are ignored.  Unknown keys and malformed values are reported by field
name.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .errors import ConfigError
from .evolution import SolverConfig


@dataclass
class RunConfig:
    r: float = 1.0
    alpha: float = 1.0
    n: int = 64
    dt: float = 1e-3
    t_end: float = 1.0
    scheme: str = "etdrk4"
    record_every: int = 1
    picard_tol: float = 1e-10
    picard_max_iter: int = 50
    N: int = 48
    n_theta: int = 33
    delta0: float = 1e-6
    T: float = 6.0
    fit_lo: float = 0.0
    fit_hi: float = 1.0
    seed: int = 0
    output_dir: str = "."

    def __post_init__(self):
        positive = ("r", "alpha", "n", "dt", "t_end", "record_every",
                    "picard_tol", "picard_max_iter", "N", "n_theta",
                    "delta0", "T")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"config field '{name}' must be positive, "
                                  f"got {getattr(self, name)}")
        if self.scheme not in ("etdrk4", "picard"):
            raise ConfigError(f"config field 'scheme' must be 'etdrk4' or 'picard', "
                              f"got '{self.scheme}'")
        if not 0.0 <= self.fit_lo < self.fit_hi <= 1.0:
            raise ConfigError("config fields 'fit_lo'/'fit_hi' must satisfy "
                              "0 <= fit_lo < fit_hi <= 1")

    def solver(self) -> SolverConfig:
        try:
            return SolverConfig(dt=self.dt, t_end=self.t_end, scheme=self.scheme,
                                picard_tol=self.picard_tol,
                                picard_max_iter=self.picard_max_iter,
                                record_every=self.record_every)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def parse_config(text: str) -> RunConfig:
    schema = {f.name: f.type for f in fields(RunConfig)}
    casts = {"float": float, "int": int, "str": str}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = (part.strip() for part in line.partition("="))
        if key not in schema:
            raise ConfigError(f"unknown config field '{key}' (line {lineno})")
        try:
            values[key] = casts[schema[key]](val)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"config field '{key}': cannot parse {val!r} "
                              f"as {schema[key]}") from exc
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())
