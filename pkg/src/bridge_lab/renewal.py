"""Renewal sequences and their centered, root-scaled path functionals.

A renewal path is a strictly increasing sequence of epochs with i.i.d.
positive spacings (optionally a delayed first epoch from a separate law),
simulated out to a horizon plus exactly one overshoot epoch so that both
the count at the horizon and the age (time since the last epoch) are
always defined.

Three rescaled functionals are evaluated on a grid in [0, 1]:

* ``xi_n``: the counting process on a growing window, centered by its
  drift; its large-n limit is a Brownian motion with scale sigma/mu^1.5.
* ``eta_u``: the epochs read at a fraction of the count at the horizon,
  centered by t*u; its large-u limit is a Brownian bridge with scale
  sigma/sqrt(mu), with no conditioning anywhere.
* ``eta_prime_n``: the counting process read at a fraction of the n-th
  epoch; its limit is a bridge with scale sigma/mu.

``y_u`` and ``phi_u`` are the building blocks of the exact algebraic
decomposition of ``eta_u`` (a centered partial-sum path, composed with a
random time change, minus its pinned linear part and an age term), and
``decomposition_residual`` verifies that identity path by path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from bridge_lab.rng_dist import DistributionSpec, RandomStream

DEFAULT_GRID_SIZE = 21


def default_grid(k: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    """Equispaced grid of k points on [0, 1] including both ends."""
    if k < 2:
        raise ValueError("grid needs at least the two endpoints")
    return np.linspace(0.0, 1.0, k)


def _check_unit_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-d array")
    if grid[0] < 0.0 or grid[-1] > 1.0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing within [0, 1]")
    return grid


@dataclass
class PathSample:
    """One functional path evaluated on a grid in [0, 1]."""

    grid: np.ndarray
    values: np.ndarray
    scale_hint: float | None = None

    def __post_init__(self) -> None:
        self.grid = _check_unit_grid(self.grid)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError("values must match the grid point for point")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("path values must be finite")

    @classmethod
    def on_free_grid(cls, grid, values, scale_hint=None) -> "PathSample":
        """Build a sample whose grid is not confined to [0, 1].

        The partial-sum path is evaluated at time-changed arguments that
        can overshoot 1, so it cannot use the unit-interval validation.
        """
        out = cls.__new__(cls)
        out.grid = np.asarray(grid, dtype=float)
        out.values = np.asarray(values, dtype=float)
        out.scale_hint = scale_hint
        return out


@dataclass
class RenewalPath:
    """Epochs 0 < R_1 < R_2 < ... < R_N with R_N the first epoch past horizon.

    The convention R_0 := 0 makes index 0 of the extended sequence well
    defined, so functionals evaluated at t = 0 vanish exactly.  With no
    delay and deterministic(c) spacing the epochs are exactly c, 2c, 3c...
    """

    epochs: np.ndarray
    horizon: float
    dist: DistributionSpec
    delay: DistributionSpec | None = None

    def __post_init__(self) -> None:
        self.epochs = np.asarray(self.epochs, dtype=float)
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.epochs.size == 0:
            raise ValueError("path must contain at least the overshoot epoch")
        if self.epochs[0] <= 0 or np.any(np.diff(self.epochs) <= 0):
            raise ValueError("epochs must be strictly increasing and positive")
        if self.epochs[-1] <= self.horizon:
            raise ValueError("last epoch must overshoot the horizon")
        if self.epochs.size >= 2 and self.epochs[-2] > self.horizon:
            raise ValueError("only the last epoch may exceed the horizon")

    @property
    def count_at_horizon(self) -> int:
        return self.epochs.size - 1

    def with_zero(self) -> np.ndarray:
        """Epoch array extended by R_0 := 0 at index 0."""
        return np.concatenate(([0.0], self.epochs))


def _batch_size(dist: DistributionSpec, span: float) -> int:
    mu, var = dist.moments()
    guess = span / mu + 6.0 * math.sqrt(var * span) / mu**1.5
    return max(32, int(guess) + 1)


def simulate_renewal(
    stream: RandomStream,
    dist: DistributionSpec,
    u: float,
    delay: DistributionSpec | None = None,
) -> RenewalPath:
    """Simulate epochs covering (0, u] plus exactly one overshoot epoch."""
    if u <= 0:
        raise ValueError("horizon must be positive")
    pieces = []
    total = 0.0
    if delay is not None:
        first = float(delay.sample(stream, 1)[0])
        pieces.append(np.array([first]))
        total = first
    while total <= u:
        chunk = dist.sample(stream, _batch_size(dist, u - total))
        pieces.append(total + np.cumsum(chunk))
        total = float(pieces[-1][-1])
    epochs = np.concatenate(pieces) if len(pieces) > 1 else pieces[0]
    cut = int(np.searchsorted(epochs, u, side="right"))
    return RenewalPath(epochs[: cut + 1], u, dist, delay)


def simulate_n_epochs(
    stream: RandomStream,
    dist: DistributionSpec,
    n: int,
    delay: DistributionSpec | None = None,
) -> RenewalPath:
    """Simulate exactly n + 1 epochs; the horizon is the n-th epoch.

    Convenient for functionals indexed by epoch count rather than by
    time: the returned path has count n at its horizon.
    """
    if n < 1:
        raise ValueError("need at least one epoch")
    draws = [dist.sample(stream, n + 1)]
    if delay is not None:
        draws.insert(0, delay.sample(stream, 1))
        draws[1] = draws[1][:-1]
    epochs = np.cumsum(np.concatenate(draws) if len(draws) > 1 else draws[0])
    return RenewalPath(epochs, float(epochs[n - 1]), dist, delay)


def count_at(path: RenewalPath, t: float) -> int:
    """Number of epochs at or before t (closed on the right)."""
    if t < 0 or t > path.horizon:
        raise ValueError("count is only defined on [0, horizon]")
    return int(np.searchsorted(path.epochs, t, side="right"))


def age(path: RenewalPath, u: float) -> float:
    """Time since the last epoch at or before u (u itself if none)."""
    r = path.with_zero()
    return float(u - r[count_at(path, u)])


def _floor_scaled(grid: np.ndarray, factor: float) -> np.ndarray:
    return np.floor(grid * factor).astype(np.int64)


def eta_u(path: RenewalPath, u: float, grid=None) -> PathSample:
    """Bridge-type functional of the epochs: (R_[t*A_u] - t*u)/sqrt(u).

    Exactly zero at t = 0 (R_0 := 0) and exactly -age/sqrt(u) at t = 1.
    The theoretical limit scale sigma/sqrt(mu) is attached as the hint.
    """
    grid = _check_unit_grid(default_grid() if grid is None else grid)
    a = count_at(path, u)
    if a < 1:
        raise ValueError("no epoch before the horizon: path is degenerate")
    r = path.with_zero()
    vals = (r[_floor_scaled(grid, a)] - grid * u) / math.sqrt(u)
    mu, var = path.dist.moments()
    return PathSample(grid, vals, scale_hint=math.sqrt(var / mu))


def y_u(path: RenewalPath, u: float, grid01) -> PathSample:
    """Centered partial-sum path (R_[t*u] - mu*t*u)/sqrt(u) on [0, ceiling]."""
    grid01 = np.asarray(grid01, dtype=float)
    if np.any(grid01 < 0):
        raise ValueError("time arguments must be nonnegative")
    idx = _floor_scaled(grid01, u)
    if idx.max() > path.count_at_horizon + 1:
        raise ValueError("path too short for the requested indices")
    r = path.with_zero()
    mu, _ = path.dist.moments()
    vals = (r[idx] - mu * grid01 * u) / math.sqrt(u)
    return PathSample.on_free_grid(grid01, vals)


def phi_u(path: RenewalPath, u: float, t: float) -> float:
    """Random time change t * A_u / u."""
    return t * count_at(path, u) / u


def decomposition_residual(path: RenewalPath, u: float, grid=None) -> float:
    """Max gap between eta_u and its exact three-term decomposition.

    The identity rewrites the bridge-type functional as the centered
    partial-sum path at the composed index floor(t*A_u), minus t times
    that path's value at index A_u, minus t times the age over sqrt(u).
    It is algebraic, so the residual is pure rounding noise; anything
    above 1e-10 signals an indexing bug.
    """
    grid = _check_unit_grid(default_grid() if grid is None else grid)
    a = count_at(path, u)
    if a < 1:
        raise ValueError("no epoch before the horizon: path is degenerate")
    r = path.with_zero()
    su = math.sqrt(u)
    mu, _ = path.dist.moments()
    eta = (r[_floor_scaled(grid, a)] - grid * u) / su
    comp = (r[_floor_scaled(grid, a)] - mu * grid * a) / su
    comp_at_one = (r[a] - mu * a) / su
    age_term = (u - r[a]) / su
    recon = comp - grid * comp_at_one - grid * age_term
    return float(np.abs(eta - recon).max())


def xi_n(path: RenewalPath, n: float, grid=None) -> PathSample:
    """Centered counting process (A_{n t} - t*n/mu)/sqrt(n).

    Unlike the bridge functionals this one is not pinned at t = 1; its
    limit is a Brownian motion with scale sigma/mu^1.5.
    """
    grid = _check_unit_grid(default_grid() if grid is None else grid)
    if path.horizon < n * float(grid.max()):
        raise ValueError("path horizon too short for the requested grid")
    counts = np.searchsorted(path.epochs, n * grid, side="right")
    mu, var = path.dist.moments()
    vals = (counts - n * grid / mu) / math.sqrt(n)
    return PathSample(grid, vals, scale_hint=math.sqrt(var) / mu**1.5)


def eta_prime_n(path: RenewalPath, n: int, grid=None) -> PathSample:
    """Bridge-type functional of the counts: (A(t*R_n) - t*n)/sqrt(n).

    Pinned exactly at both ends for a non-delayed path; limit scale
    sigma/mu.
    """
    grid = _check_unit_grid(default_grid() if grid is None else grid)
    if path.epochs.size < n:
        raise ValueError(f"path has fewer than n = {n} epochs")
    rn = path.epochs[n - 1]
    counts = np.searchsorted(path.epochs, grid * rn, side="right")
    mu, var = path.dist.moments()
    vals = (counts - grid * n) / math.sqrt(n)
    return PathSample(grid, vals, scale_hint=math.sqrt(var) / mu)
