"""Boundary flux coefficients phi(x, t) for the Robin condition.

phi > 0 drains mass through the boundary, phi < 0 injects it.  Every preset
knows its time derivative so the gradient bound can integrate |phi_t|.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ParameterError


class BoundaryFlux:
    """Base class; subclasses give ``value`` and ``rate`` on arrays of points."""

    knots: tuple = ()

    def __call__(self, x, t):
        return self.value(np.atleast_2d(x), float(t))

    def value(self, x, t):
        raise NotImplementedError

    def rate(self, x, t):
        raise NotImplementedError

    def neg_sup(self, t, points=None) -> float:
        """||phi^-(t)|| in L^inf over the boundary (points needed for non-uniform phi)."""
        pts = np.zeros((1, 1)) if points is None else points
        return float(max(0.0, -np.min(self.value(pts, t))))

    def neg_sup_max(self, t0, t1, points=None, samples: int = 2001) -> float:
        ts = np.union1d(np.linspace(t0, t1, samples), [k for k in self.knots if t0 <= k <= t1])
        return max(self.neg_sup(t, points) for t in ts)


@dataclass
class ConstantFlux(BoundaryFlux):
    c: float = 0.0

    def value(self, x, t):
        return np.full(len(x), self.c)

    def rate(self, x, t):
        return np.zeros(len(x))

    def neg_sup(self, t, points=None):
        return max(0.0, -self.c)


@dataclass
class PiecewiseLinearFlux(BoundaryFlux):
    """Spatially uniform, piecewise linear in time, constant outside the knots."""
    times: tuple = (0.0, 1.0)
    values: tuple = (0.0, 0.0)

    def __post_init__(self):
        self.times = tuple(float(t) for t in self.times)
        self.values = tuple(float(v) for v in self.values)
        if len(self.times) < 2 or len(self.times) != len(self.values) or np.any(np.diff(self.times) <= 0):
            raise ParameterError("piecewise-linear flux needs >= 2 increasing knots")
        self.knots = self.times

    def value(self, x, t):
        return np.full(len(x), float(np.interp(t, self.times, self.values)))

    def rate(self, x, t):
        i = np.searchsorted(self.times, t, side="right") - 1
        if i < 0 or i >= len(self.times) - 1:
            return np.zeros(len(x))
        s = (self.values[i + 1] - self.values[i]) / (self.times[i + 1] - self.times[i])
        return np.full(len(x), s)

    def neg_sup(self, t, points=None):
        return max(0.0, -float(np.interp(t, self.times, self.values)))


@dataclass
class SinusoidalFlux(BoundaryFlux):
    """phi = mean + amplitude sin(2 pi frequency t + phase), uniform in space."""
    mean: float = 0.0
    amplitude: float = 0.0
    frequency: float = 1.0
    phase: float = 0.0

    def _arg(self, t):
        return 2 * np.pi * self.frequency * t + self.phase

    def value(self, x, t):
        return np.full(len(x), self.mean + self.amplitude * np.sin(self._arg(t)))

    def rate(self, x, t):
        return np.full(len(x), 2 * np.pi * self.frequency * self.amplitude * np.cos(self._arg(t)))

    def neg_sup(self, t, points=None):
        return max(0.0, -(self.mean + self.amplitude * np.sin(self._arg(t))))


class FunctionFlux(BoundaryFlux):
    """Wrap ``func(x, t)`` (x of shape (m, dim)); ``dfunc`` is its time derivative."""

    def __init__(self, func, dfunc=None):
        self.func, self.dfunc = func, dfunc

    def value(self, x, t):
        return np.broadcast_to(np.asarray(self.func(x, t), float), (len(x),)).copy()

    def rate(self, x, t):
        if self.dfunc is None:
            h = 1e-6
            return (self.value(x, t + h) - self.value(x, t - h)) / (2 * h)
        return np.broadcast_to(np.asarray(self.dfunc(x, t), float), (len(x),)).copy()


def flux_from_config(spec: dict) -> BoundaryFlux:
    spec = dict(spec or {})
    kind = spec.pop("preset", "constant")
    try:
        if kind == "constant":
            return ConstantFlux(float(spec.get("value", 0.0)))
        if kind == "piecewise_linear":
            return PiecewiseLinearFlux(tuple(spec["times"]), tuple(spec["values"]))
        if kind == "sinusoidal":
            return SinusoidalFlux(float(spec.get("mean", 0.0)), float(spec.get("amplitude", 0.0)),
                                  float(spec.get("frequency", 1.0)), float(spec.get("phase", 0.0)))
    except (KeyError, ParameterError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad boundary flux specification: {exc}") from exc
    raise ConfigurationError(f"unknown boundary flux preset {kind!r}")
