"""Experiment configuration: an INI-like ``key = value`` format with two sections.

::

    # theorem1.ini
    [experiment]
    name = theorem1_match
    seed = 7
    samples = 50000

    [model]
    n = 2, 5, 10

Lists are comma-separated; schedules are ``n:N`` pairs.  Unknown keys,
duplicate keys and keys outside a section are errors that carry the line
number.  Experiment-specific requirements are checked by ``validate`` before
anything is sampled.
"""
from __future__ import annotations

import re
from dataclasses import asdict, dataclass, field

from ..growth import RateConvention

EXPERIMENTS = (
    "identity_eq1",
    "theorem1_match",
    "corollary1_fluctuations",
    "multiedge_convergence",
    "growth_equivalence",
    "conjecture_schedule",
)

MIN_FLUCTUATION_N = 8
MAX_SEED = (1 << 64) - 1


class ConfigError(ValueError):
    """Syntax or validation problems; ``problems`` lists every offending item."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def _ints(text: str) -> list[int]:
    return [int(t) for t in _split(text)]


def _floats(text: str) -> list[float]:
    return [float(t) for t in _split(text)]


def _split(text: str) -> list[str]:
    items = [t.strip() for t in text.split(",")]
    if any(not t for t in items):
        raise ValueError("empty list item")
    return items


def _pairs(text: str) -> list[tuple[int, int]]:
    out = []
    for item in _split(text):
        a, sep, b = item.partition(":")
        if not sep:
            raise ValueError(f"expected n:N, got {item!r}")
        out.append((int(a), int(b)))
    return out


# section -> key -> (attribute, parser)
_SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "experiment": {
        "name": ("experiment", str),
        "seed": ("master_seed", int),
        "samples": ("samples", int),
        "alpha": ("alpha", float),
        "output_dir": ("output_dir", str),
        "workers": ("workers", int),
        "bins": ("bins", int),
        "tw_tolerance": ("tw_tolerance", float),
    },
    "model": {
        "m": ("m", _ints),
        "n": ("n", _ints),
        "gamma": ("gamma", float),
        "N": ("N", _ints),
        "convention": ("convention", str),
        "z1": ("z1", _floats),
        "z2": ("z2", _floats),
        "schedule": ("schedule", _pairs),
        "edge_samples": ("edge_samples", int),
    },
}

OVERRIDABLE = {"seed": "master_seed", "samples": "samples", "out": "output_dir",
               "workers": "workers", "alpha": "alpha"}


@dataclass
class ExperimentConfig:
    experiment: str = ""
    m: list[int] = field(default_factory=list)
    n: list[int] = field(default_factory=list)
    gamma: float = 1.0
    N: list[int] = field(default_factory=list)
    convention: str = RateConvention.RATE_N_MINUS_I.value
    samples: int = 10_000
    master_seed: int = 0
    alpha: float = 0.001
    output_dir: str = ""
    z1: list[float] = field(default_factory=list)
    z2: list[float] = field(default_factory=list)
    schedule: list[tuple[int, int]] = field(default_factory=list)
    workers: int = 1
    bins: int = 60
    tw_tolerance: float = 0.08
    edge_samples: int = 100_000

    def as_dict(self) -> dict:
        d = asdict(self)
        d["schedule"] = [list(p) for p in self.schedule]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        d = dict(d)
        d["schedule"] = [tuple(p) for p in d.get("schedule", [])]
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError([f"unknown field {k!r}" for k in unknown])
        return validate(cls(**d))

    def cases_mn(self) -> list[tuple[int, int]]:
        """(m, n) pairs: m defaults to n; a single value broadcasts."""
        ns = self.n
        ms = self.m or ns
        if len(ms) == 1 and len(ns) > 1:
            ms = ms * len(ns)
        if len(ns) == 1 and len(ms) > 1:
            ns = ns * len(ms)
        return list(zip(ms, ns))


_SECTION = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")


def parse_config(text: str, validate_fields: bool = True) -> ExperimentConfig:
    cfg = ExperimentConfig()
    problems: list[str] = []
    seen: dict[tuple[str, str], int] = {}
    sections_seen: set[str] = set()
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            section = m.group(1)
            if section not in _SCHEMA:
                problems.append(f"line {lineno}: unknown section [{section}]")
                section = "?"
            elif section in sections_seen:
                problems.append(f"line {lineno}: duplicate section [{section}]")
            sections_seen.add(section)
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            problems.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        if section is None:
            problems.append(f"line {lineno}: key {key!r} outside any section")
            continue
        if section == "?":
            continue
        if key not in _SCHEMA[section]:
            problems.append(f"line {lineno}: unknown key {key!r} in [{section}]")
            continue
        if (section, key) in seen:
            problems.append(f"line {lineno}: duplicate key {key!r} (first set on line {seen[section, key]})")
            continue
        seen[section, key] = lineno
        attr, parser = _SCHEMA[section][key]
        try:
            setattr(cfg, attr, parser(value))
        except ValueError as e:
            problems.append(f"line {lineno}: bad value for {key!r}: {e}")
    if problems:
        raise ConfigError(problems)
    if validate_fields:
        validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check every field the chosen experiment relies on; raise with the full list."""
    p: list[str] = []
    if cfg.experiment not in EXPERIMENTS:
        p.append(f"experiment: {cfg.experiment!r} is not one of {', '.join(EXPERIMENTS)}")
    if cfg.samples < 1:
        p.append("samples: must be >= 1")
    if not 0 <= cfg.master_seed <= MAX_SEED:
        p.append("seed: must fit in 64 unsigned bits")
    if not 0 < cfg.alpha < 1:
        p.append("alpha: must lie in (0, 1)")
    if cfg.workers < 1:
        p.append("workers: must be >= 1")
    if cfg.bins < 1:
        p.append("bins: must be >= 1")
    if not cfg.gamma > 0:
        p.append("gamma: must be positive")
    if any(v < 1 for v in cfg.m + cfg.n):
        p.append("m/n: lattice sizes must be >= 1")
    if any(v < 1 for v in cfg.N):
        p.append("N: multiplicities must be >= 1")
    try:
        RateConvention(cfg.convention)
    except ValueError:
        p.append(f"convention: {cfg.convention!r} is not one of "
                 f"{', '.join(c.value for c in RateConvention)}")
    e = cfg.experiment

    def need(name, cond, msg):
        if not cond:
            p.append(f"{name}: {msg}")

    if e in ("theorem1_match", "corollary1_fluctuations", "multiedge_convergence",
             "growth_equivalence"):
        need("n", cfg.n, "required, non-empty list")
        if cfg.m and cfg.n and len(cfg.m) != len(cfg.n) and 1 not in (len(cfg.m), len(cfg.n)):
            p.append("m: must have one entry or as many as n")
    if e == "identity_eq1":
        need("z1", cfg.z1, "required, non-empty list")
        need("z2", len(cfg.z2) == len(cfg.z1), "needs one entry per z1")
        need("z1/z2", all(z > 0 for z in cfg.z1 + cfg.z2), "must be positive")
    if e == "theorem1_match":
        need("gamma", cfg.gamma == 1.0, "the identity holds for gamma = 1 only")
    if e == "corollary1_fluctuations":
        need("n", all(v >= MIN_FLUCTUATION_N for v in cfg.n),
             f"must be >= {MIN_FLUCTUATION_N} for the n^(1/3) scaling to be meaningful")
        need("m", not cfg.m or cfg.m == cfg.n, "diagonal only: leave m unset")
        need("tw_tolerance", 0 < cfg.tw_tolerance <= 1, "must lie in (0, 1]")
    if e in ("multiedge_convergence", "growth_equivalence"):
        need("N", cfg.N, "required, non-empty list")
    if e == "growth_equivalence":
        need("edge_samples", cfg.edge_samples >= 1, "must be >= 1")
    if e == "conjecture_schedule":
        need("schedule", cfg.schedule, "required list of n:N pairs")
        need("schedule", all(a >= 1 and b >= 1 for a, b in cfg.schedule), "entries must be >= 1")
    if p:
        raise ConfigError(p)
    if not cfg.output_dir:
        cfg.output_dir = f"results/{cfg.experiment}"
    return cfg


def apply_overrides(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    """CLI flags win over file values; ``None`` means not given."""
    for k, v in overrides.items():
        if v is not None:
            setattr(cfg, OVERRIDABLE[k], v)
    return validate(cfg)
