"""TOML run configuration with sections [law], [problem], [grid], [solver], [output].

Example::

    [law]
    terms = [[0.0, 1.0], [1.0, 1.0]]

    [problem]
    lambda = 1.0
    t_end = 0.2
    initial = { kind = "sin2", base = 1.0, amplitude = 1.0 }
    phi = { preset = "constant", value = 0.5 }

    [grid]
    lengths = [1.0, 1.0]
    cells = [24, 24]

    [solver]
    dt_initial = 1e-3

    [output]
    snapshot_count = 21
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import tomli

from .bounds import BoundsConfig
from .boundary import flux_from_config
from .constitutive import ForchheimerLaw
from .errors import ConfigurationError, ForchheimerError
from .mesh import DiscreteField, Grid
from .solver import ProblemSetup, SolverConfig


def initial_field(grid: Grid, spec: dict) -> DiscreteField:
    """Initial data presets: constant, sin2, cosine, gaussian."""
    spec = dict(spec or {"kind": "constant", "value": 1.0})
    kind = spec.get("kind", "constant")
    X = grid.centers()
    L = grid.lengths
    if kind == "constant":
        v = np.full(grid.shape, float(spec.get("value", 1.0)))
    elif kind == "sin2":
        prod = np.ones(grid.shape)
        for x, l in zip(X, L):
            prod = prod * np.sin(np.pi * x / l) ** 2
        v = float(spec.get("base", 1.0)) + float(spec.get("amplitude", 1.0)) * prod
    elif kind == "cosine":
        prod = np.ones(grid.shape)
        for x, l in zip(X, L):
            prod = prod * np.cos(np.pi * x / l)
        v = float(spec.get("base", 2.0)) + float(spec.get("amplitude", 1.0)) * prod
    elif kind == "gaussian":
        c = spec.get("center", [l / 2 for l in L])
        r2 = sum((x - ci) ** 2 for x, ci in zip(X, c))
        v = (float(spec.get("base", 0.0))
             + float(spec.get("amplitude", 1.0)) * np.exp(-r2 / (2 * float(spec.get("width", 0.1)) ** 2)))
    else:
        raise ConfigurationError(f"unknown initial condition kind {kind!r}")
    return DiscreteField(grid, v, 0.0)


@dataclass
class RunConfig:
    setup: ProblemSetup
    solver: SolverConfig
    output: dict = field(default_factory=dict)
    bounds: BoundsConfig = field(default_factory=BoundsConfig)
    raw: dict = field(default_factory=dict)


def parse_config(doc: dict) -> RunConfig:
    try:
        law_s, prob, grid_s = doc["law"], doc["problem"], doc["grid"]
    except KeyError as exc:
        raise ConfigurationError(f"missing section [{exc.args[0]}]") from exc
    try:
        if "terms" in law_s:
            law = ForchheimerLaw.from_terms(law_s["terms"])
        else:
            law = ForchheimerLaw(tuple(law_s["exponents"]), tuple(law_s["coefficients"]))
        grid = Grid(tuple(grid_s["lengths"]), tuple(grid_s["cells"]))
        u0 = initial_field(grid, prob.get("initial"))
        setup = ProblemSetup(law, float(prob["lambda"]), grid, u0, float(prob["t_end"]),
                             flux_from_config(prob.get("phi", {})))
        out = dict(doc.get("output", {}))
        if "snapshot_times" in out:
            snaps = tuple(float(s) for s in out["snapshot_times"])
        else:
            snaps = tuple(np.linspace(0.0, setup.t_end, int(out.get("snapshot_count", 11))))
        sv = dict(doc.get("solver", {}))
        known = {"dt_initial", "dt_min", "dt_max", "picard_tol", "picard_max_iters",
                 "eps_floor", "easy_iters"}
        extra = set(sv) - known
        if extra:
            raise ConfigurationError(f"unknown [solver] keys: {sorted(extra)}")
        solver = SolverConfig(snapshot_times=snaps, **sv)
        bcfg = BoundsConfig(**doc.get("bounds", {}))
    except ConfigurationError:
        raise
    except (ForchheimerError, KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid configuration: {exc}") from exc
    return RunConfig(setup, solver, out, bcfg, doc)


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomli.load(fh)
    except (OSError, tomli.TOMLDecodeError) as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    return parse_config(doc)
