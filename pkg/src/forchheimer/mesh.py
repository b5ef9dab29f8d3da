"""Uniform cell-centred grids on boxes, discrete fields and their norms."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

EPS_FLOOR = 1e-12


@dataclass(frozen=True)
class Grid:
    lengths: tuple
    cells: tuple

    def __post_init__(self):
        L = tuple(float(x) for x in self.lengths)
        n = tuple(int(x) for x in self.cells)
        if len(L) not in (1, 2) or len(L) != len(n):
            raise ParameterError("grids are 1D or 2D with matching lengths/cells")
        if any(x <= 0 for x in L) or any(c < 2 for c in n):
            raise ParameterError("lengths must be positive and each axis needs >= 2 cells")
        object.__setattr__(self, "lengths", L)
        object.__setattr__(self, "cells", n)

    @property
    def dim(self):
        return len(self.cells)

    @property
    def shape(self):
        return self.cells

    @property
    def h(self):
        return tuple(L / n for L, n in zip(self.lengths, self.cells))

    @property
    def cell_volume(self):
        return float(np.prod(self.h))

    @property
    def measure(self):
        return float(np.prod(self.lengths))

    @property
    def boundary_measure(self):
        if self.dim == 1:
            return 2.0
        return 2.0 * sum(self.lengths)

    def axes(self):
        return [(np.arange(n) + 0.5) * h for n, h in zip(self.cells, self.h)]

    def centers(self):
        """Tuple of coordinate arrays of shape ``cells``."""
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    def refine(self, factor: int = 2):
        return Grid(self.lengths, tuple(c * factor for c in self.cells))

    def sides(self):
        """Boundary sides as (axis, end) with end 0 (low) or 1 (high)."""
        return [(ax, end) for ax in range(self.dim) for end in (0, 1)]

    def side_area(self, axis):
        """Measure of one boundary face normal to ``axis``."""
        if self.dim == 1:
            return 1.0
        return self.h[1 - axis]

    def side_points(self, axis, end):
        """Coordinates of the boundary face centres on one side, shape (m, dim)."""
        ax = self.axes()
        if self.dim == 1:
            return np.array([[0.0 if end == 0 else self.lengths[0]]])
        other = ax[1 - axis]
        pos = np.full_like(other, 0.0 if end == 0 else self.lengths[axis])
        cols = [pos, other] if axis == 0 else [other, pos]
        return np.stack(cols, axis=1)


def take_side(values, axis, end, depth=0):
    """Cell layer number ``depth`` counted inward from a side (1D arrays are returned)."""
    idx = depth if end == 0 else -1 - depth
    return np.atleast_1d(np.take(values, idx, axis=axis))


def extrapolate_side(values, axis, end):
    """Linear extrapolation of cell values to boundary faces: 1.5 u_0 - 0.5 u_1."""
    return 1.5 * take_side(values, axis, end, 0) - 0.5 * take_side(values, axis, end, 1)


@dataclass
class DiscreteField:
    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.grid.shape)

    @property
    def nonnegative(self):
        return bool(np.all(self.values >= 0))

    @classmethod
    def from_function(cls, grid, func, time=0.0):
        return cls(grid, np.broadcast_to(func(*grid.centers()), grid.shape).copy(), time)


def lp_norm(f: DiscreteField, alpha: float, root: bool = False) -> float:
    """Midpoint sum of |u|^alpha; the alpha-th root when ``root``."""
    if alpha <= 0:
        raise ParameterError("alpha must be positive")
    val = float(np.sum(np.abs(f.values) ** alpha) * f.grid.cell_volume)
    return val ** (1.0 / alpha) if root else val


def boundary_integral(f: DiscreteField, alpha: float) -> float:
    """Sum over boundary faces of |u_b|^alpha times face measure, u_b extrapolated."""
    g = f.grid
    total = 0.0
    for ax, end in g.sides():
        ub = extrapolate_side(f.values, ax, end)
        total += float(np.sum(np.abs(ub) ** alpha)) * g.side_area(ax)
    return total


def _tangential(values, axis, h):
    return np.gradient(values, h, axis=axis)


def face_gradient_sets(f: DiscreteField):
    """For each axis, |grad u| and weights on the dual cells of that axis's faces.

    Returns a list of (grad_magnitude, face_values_pair, weight) with face
    values given as (u_left, u_right) for the weight average.  Boundary faces
    use the extrapolated value and half-width dual cells.
    """
    g, u = f.grid, f.values
    out = []
    for ax in range(g.dim):
        h = g.h[ax]
        lo, hi = (np.expand_dims(take_side(u, ax, e, 0), ax) if g.dim == 2
                  else extrapolate_side(u, ax, e) for e in (0, 1))
        if g.dim == 2:
            lo = 1.5 * lo - 0.5 * np.expand_dims(take_side(u, ax, 0, 1), ax)
            hi = 1.5 * hi - 0.5 * np.expand_dims(take_side(u, ax, 1, 1), ax)
        ext = np.concatenate([lo, u, hi], axis=ax)
        dist = np.full(g.cells[ax] + 1, h)
        dist[0] = dist[-1] = h / 2
        shp = [1] * g.dim
        shp[ax] = -1
        left = np.take(ext, np.arange(g.cells[ax] + 1), axis=ax)
        right = np.take(ext, np.arange(1, g.cells[ax] + 2), axis=ax)
        normal = (right - left) / dist.reshape(shp)
        sq = normal ** 2
        if g.dim == 2:
            t = 1 - ax
            tg = _tangential(u, t, g.h[t])
            tg_ext = np.concatenate([np.take(tg, [0], axis=ax), tg, np.take(tg, [-1], axis=ax)], axis=ax)
            tl = np.take(tg_ext, np.arange(g.cells[ax] + 1), axis=ax)
            tr = np.take(tg_ext, np.arange(1, g.cells[ax] + 2), axis=ax)
            sq = sq + (0.5 * (tl + tr)) ** 2
        w = dist.reshape(shp) * (g.cell_volume / h)
        out.append((np.sqrt(sq), (left, right), np.broadcast_to(w, sq.shape)))
    return out


def grad_norm(f: DiscreteField, p: float, weight_exponent: float = 0.0,
              floor: float = EPS_FLOOR, report_floor: bool = False, mask=None):
    """Approximate int |u|^w |grad u|^p over the domain.

    Face gradients come from central differences (tangential parts averaged
    from cell-centred differences); the integral over each axis's dual cells is
    averaged across axes.  With w < 0, |u| is floored at ``floor``.
    """
    floored = False
    total = 0.0
    sets = face_gradient_sets(f)
    msets = face_gradient_sets(DiscreteField(f.grid, mask.astype(float))) if mask is not None else None
    for k, (gm, (ul, ur), w) in enumerate(sets):
        val = np.abs(gm) ** p
        if msets is not None:
            ml, mr = msets[k][1]
            val = np.where((ml > 0.5) & (mr > 0.5), val, 0.0)
        if weight_exponent != 0.0:
            al, ar = np.abs(ul), np.abs(ur)
            if weight_exponent < 0:
                floored = floored or bool(np.any(np.minimum(al, ar) < floor))
                al, ar = np.maximum(al, floor), np.maximum(ar, floor)
            with np.errstate(divide="ignore"):
                val = val * 0.5 * (al ** weight_exponent + ar ** weight_exponent)
        total += float(np.sum(val * w))
    total /= len(sets)
    return (total, floored) if report_floor else total


@dataclass
class SpaceTimeTrace:
    """Snapshots u(t_k) on one grid, with trapezoidal time integration."""
    grid: Grid
    times: np.ndarray
    values: np.ndarray  # shape (K,) + grid.shape
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.times),) + self.grid.shape:
            raise ParameterError("snapshot array does not match times and grid")
        if np.any(np.diff(self.times) <= 0):
            raise ParameterError("snapshot times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def field(self, k) -> DiscreteField:
        return DiscreteField(self.grid, self.values[k], float(self.times[k]))

    def fields(self):
        return [self.field(k) for k in range(len(self))]

    def time_integral(self, per_snapshot) -> float:
        """Trapezoid rule of a per-snapshot scalar (callable on DiscreteField)."""
        y = np.array([per_snapshot(f) for f in self.fields()])
        if len(y) == 1:
            return 0.0
        return float(np.trapezoid(y, self.times))


def write_snapshot(path, f: DiscreteField):
    """Plain-text snapshot: four header rows then row-major values (17 digits)."""
    g = f.grid
    with open(path, "w", newline="") as fh:
        fh.write("dim," + str(g.dim) + "\n")
        fh.write("lengths," + ",".join(repr(x) for x in g.lengths) + "\n")
        fh.write("cells," + ",".join(str(c) for c in g.cells) + "\n")
        fh.write("time," + f"{f.time:.17g}" + "\n")
        rows = f.values.reshape(g.cells[0], -1)
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_snapshot(path) -> DiscreteField:
    with open(path) as fh:
        lines = fh.read().strip().splitlines()
    head = {ln.split(",")[0]: ln.split(",")[1:] for ln in lines[:4]}
    grid = Grid(tuple(float(x) for x in head["lengths"]), tuple(int(x) for x in head["cells"]))
    vals = np.array([[float(x) for x in ln.split(",")] for ln in lines[4:]])
    return DiscreteField(grid, vals.reshape(grid.shape), float(head["time"][0]))
