"""Regenerative cumulative processes, their inverses, and area splitting.

A cumulative process S is nondecreasing and right-continuous with
S(0) = 0, represented either as a pure jump function (atom times and
sizes) or as a piecewise-linear function on recorded knots.  Reading S at
a fraction of its generalized inverse, or locating the point that splits
the accumulated mass in a t : (1-t) ratio, produces bridge-type paths
whose limit scale is not known in closed form and is estimated from the
ensemble downstream.

The concrete S builders are a cycle-based regenerative constructor (atoms
at cycle ends, or mass spread uniformly over each cycle) and the running
integral of a reflected drifted driver, where the driver is Brownian or a
compensated compound Poisson plus an optional Brownian component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from bridge_lab.renewal import PathSample, _check_unit_grid
from bridge_lab.rng_dist import DistributionSpec, RandomStream

ORIENTATIONS = ("ratio", "displayed")


@dataclass
class CumulativeProcess:
    """Nondecreasing right-continuous S with S(0) = 0.

    ``kind`` is "step" (times/sizes of atoms) or "linear" (knots/values of
    a piecewise-linear path).  ``cycle_times`` optionally records the
    regeneration boundaries the process was built from.
    """

    kind: str
    times: np.ndarray
    sizes: np.ndarray
    horizon: float
    cycle_times: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("step", "linear"):
            raise ValueError("kind must be 'step' or 'linear'")
        self.times = np.asarray(self.times, dtype=float)
        self.sizes = np.asarray(self.sizes, dtype=float)
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.kind == "step":
            if np.any(self.times <= 0) or np.any(np.diff(self.times) <= 0):
                raise ValueError("atom times must be positive and increasing")
            if np.any(self.sizes < 0):
                raise ValueError("atom sizes must be nonnegative")
            self._cum = np.concatenate(([0.0], np.cumsum(self.sizes)))
        else:
            if self.times.size < 2 or self.times[0] != 0.0:
                raise ValueError("linear knots must start at time 0")
            if np.any(np.diff(self.times) <= 0):
                raise ValueError("knots must be strictly increasing")
            if self.sizes[0] != 0.0 or np.any(np.diff(self.sizes) < -1e-12):
                raise ValueError("values must start at 0 and be nondecreasing")

    def value(self, t):
        """S(t), vectorized over t within [0, horizon]."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.horizon * (1 + 1e-12)):
            raise ValueError("query outside [0, horizon]")
        if self.kind == "step":
            out = self._cum[np.searchsorted(self.times, t, side="right")]
        else:
            out = np.interp(t, self.times, self.sizes)
        if out.ndim == 0:
            return float(out)
        return out

    @property
    def total(self) -> float:
        """S at the horizon."""
        return self.value(self.horizon)


@dataclass(frozen=True)
class DriverSpec:
    """Zero-mean driver for the reflection recursion.

    kind "brownian" is sigma * W; kind "levy" adds compound-Poisson jumps
    (rate ``jump_rate``, sizes from ``jump_dist``) compensated by their
    mean drift so the driver stays centered; kind "zero" is the constant
    zero path, useful for exercising the pure drift.
    """

    kind: str
    sigma: float = 1.0
    jump_rate: float = 0.0
    jump_dist: DistributionSpec | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("zero", "brownian", "levy"):
            raise ValueError(f"unknown driver kind {self.kind!r}")
        if self.kind == "brownian" and self.sigma <= 0:
            raise ValueError("brownian driver needs sigma > 0")
        if self.kind == "levy":
            if self.jump_rate <= 0 or self.jump_dist is None:
                raise ValueError("levy driver needs jump_rate > 0 and a jump law")
            if self.sigma < 0:
                raise ValueError("sigma must be nonnegative")

    def increments(self, stream: RandomStream, n: int, dt: float) -> np.ndarray:
        """n mesh increments of the zero-mean driver."""
        if self.kind == "zero":
            return np.zeros(n)
        out = np.zeros(n)
        if self.sigma > 0:
            out += self.sigma * math.sqrt(dt) * stream.normals(n)
        if self.kind == "levy":
            counts = stream.poisson(self.jump_rate * dt, n)
            total = int(counts.sum())
            if total:
                sizes = self.jump_dist.sample(stream, total)
                cells = np.repeat(np.arange(n), counts)
                out += np.bincount(cells, weights=sizes, minlength=n)
            mean_jump = self.jump_dist.moments()[0]
            out -= self.jump_rate * mean_jump * dt
        return out


@dataclass
class ReflectedPath:
    """Nonnegative path on a uniform mesh, obtained by reflection at zero."""

    dt: float
    values: np.ndarray
    driver: DriverSpec

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.dt <= 0:
            raise ValueError("mesh width must be positive")
        if self.values[0] != 0.0 or np.any(self.values < 0):
            raise ValueError("reflected path must start at 0 and stay nonnegative")

    @property
    def mesh(self) -> np.ndarray:
        return self.dt * np.arange(self.values.size)


def simulate_reflected(
    stream: RandomStream, driver: DriverSpec, horizon: float, dt: float
) -> ReflectedPath:
    """Reflect the unit-drift-down driver at zero on a mesh of width dt.

    The path is the driver minus its running minimum, computed from the
    discretized drifted increments; it starts at zero and regenerates
    whenever the running minimum is renewed.
    """
    if dt <= 0:
        raise ValueError("mesh width must be positive")
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    n = int(round(horizon / dt))
    if n < 1:
        raise ValueError("horizon shorter than one mesh step")
    drifted = np.concatenate(([0.0], np.cumsum(driver.increments(stream, n, dt) - dt)))
    x = drifted - np.minimum.accumulate(drifted)
    return ReflectedPath(dt, x, driver)


def area_process(x: ReflectedPath) -> CumulativeProcess:
    """Running trapezoid integral of the path, as a piecewise-linear S."""
    v = x.values
    steps = 0.5 * (v[1:] + v[:-1]) * x.dt
    values = np.concatenate(([0.0], np.cumsum(steps)))
    mesh = x.mesh
    return CumulativeProcess("linear", mesh, values, float(mesh[-1]))


def reflected_with_area(
    stream: RandomStream,
    driver: DriverSpec,
    target_area: float,
    dt: float,
    slack: float = 1.02,
) -> tuple[ReflectedPath, CumulativeProcess]:
    """Simulate a reflected path until its area exceeds ``target_area``.

    Extends the path chunk by chunk (continuing the same stream, so the
    result is a deterministic function of the stream) and raises if the
    area stops growing, which happens only for a degenerate driver.
    """
    if target_area <= 0:
        raise ValueError("target area must be positive")
    chunk = max(1024, int(target_area / dt / 3))
    pieces = [np.zeros(1)]
    last_drifted = 0.0
    run_min = 0.0
    area = 0.0
    stalls = 0
    while area <= target_area * slack:
        inc = driver.increments(stream, chunk, dt) - dt
        drifted = last_drifted + np.cumsum(inc)
        mins = np.minimum(np.minimum.accumulate(drifted), run_min)
        x = drifted - mins
        prev = pieces[-1][-1]
        gained = dt * (0.5 * (prev + x[-1]) + float(x[:-1].sum()))
        if gained < dt * 1e-9:
            stalls += 1
            if stalls >= 3:
                raise ValueError("driver accumulates no area; cannot reach target")
        area += gained
        pieces.append(x)
        last_drifted = float(drifted[-1])
        run_min = float(mins[-1])
    path = ReflectedPath(dt, np.concatenate(pieces), driver)
    return path, area_process(path)


def build_regenerative(
    stream: RandomStream, gen: "CycleGenerator", horizon: float
) -> CumulativeProcess:
    """Accumulate i.i.d. cycles into a cumulative process up to horizon."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    chunks_d = []
    chunks_m = []
    total = 0.0
    chunk = 64
    while total <= horizon:
        d, m = gen.draw_cycles(stream, chunk)
        chunks_d.append(d)
        chunks_m.append(m)
        total += float(np.sum(d))
        # Grow the chunk toward the expected remaining count so long
        # horizons need only a handful of draws.
        mean_d = total / sum(c.size for c in chunks_d)
        if mean_d > 0:
            chunk = max(64, int(1.1 * (horizon - total) / mean_d) + 16)
    durations = np.concatenate(chunks_d)
    masses = np.concatenate(chunks_m)
    cum = np.cumsum(durations)
    stop = int(np.searchsorted(cum, horizon, side="left")) + 1
    durations = durations[:stop]
    masses = masses[:stop]
    bounds = np.concatenate(([0.0], cum[:stop]))
    if gen.kind == "atom":
        times = bounds[1:]
        keep = times <= horizon
        return CumulativeProcess(
            "step", times[keep], np.asarray(masses)[keep], horizon, bounds
        )
    values = np.concatenate(([0.0], np.cumsum(masses)))
    return CumulativeProcess("linear", bounds, values, horizon, bounds)


@dataclass(frozen=True)
class CycleGenerator:
    """I.i.d. cycle factory: a duration law plus a mass placement rule.

    kind "atom" places one atom of mass drawn from ``mass`` at the right
    endpoint of each cycle; kind "spread" lays the cycle's own duration
    out as mass at unit density, so the cumulative process of a spread
    generator is exactly the identity.
    """

    kind: str
    duration: DistributionSpec
    mass: DistributionSpec | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("atom", "spread"):
            raise ValueError("kind must be 'atom' or 'spread'")
        if self.kind == "atom" and self.mass is None:
            raise ValueError("atom cycles need a mass law")

    def draw_cycle(self, stream: RandomStream) -> tuple[float, float]:
        d = float(self.duration.sample(stream, 1)[0])
        if self.kind == "spread":
            return d, d
        return d, float(self.mass.sample(stream, 1)[0])

    def draw_cycles(self, stream: RandomStream, count: int) -> tuple[np.ndarray, np.ndarray]:
        """Draw ``count`` cycles at once, returning (durations, masses)."""
        d = self.duration.sample(stream, count)
        if self.kind == "spread":
            return d, d.copy()
        return d, self.mass.sample(stream, count)


def generalized_inverse(s: CumulativeProcess, u: float) -> float:
    """First time the process strictly exceeds level u."""
    if u < 0:
        raise ValueError("level must be nonnegative")
    if u >= s.total:
        raise ValueError("level is never exceeded within the horizon")
    if s.kind == "step":
        return float(s.times[np.searchsorted(s._cum[1:], u, side="right")])
    j = int(np.searchsorted(s.sizes, u, side="right"))
    v0, v1 = s.sizes[j - 1], s.sizes[j]
    t0, t1 = s.times[j - 1], s.times[j]
    return float(t0 + (u - v0) / (v1 - v0) * (t1 - t0))


def _first_reach(s: CumulativeProcess, targets: np.ndarray) -> np.ndarray:
    """inf{v : S(v) >= target}, vectorized; targets within [0, total]."""
    out = np.empty(targets.shape)
    zero = targets <= 0.0
    out[zero] = 0.0
    pos = ~zero
    if s.kind == "step":
        idx = np.searchsorted(s._cum[1:], targets[pos], side="left")
        out[pos] = s.times[idx]
        return out
    j = np.searchsorted(s.sizes, targets[pos], side="left")
    v0 = s.sizes[j - 1]
    v1 = s.sizes[j]
    t0 = s.times[j - 1]
    t1 = s.times[j]
    out[pos] = t0 + (targets[pos] - v0) / (v1 - v0) * (t1 - t0)
    return out


def split_point(
    s: CumulativeProcess, u: float, t: float, orientation: str = "ratio"
) -> float:
    """Point dividing the mass accumulated by time u in ratio t : (1-t).

    The default "ratio" orientation returns the first v with
    S(v) >= t * S(u).  The "displayed" orientation targets the complement
    (1-t) * S(u); its natural centering is (1-t) * u.
    """
    if orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}")
    if not 0.0 <= t <= 1.0:
        raise ValueError("split fraction must lie in [0, 1]")
    su = s.value(u)
    if su <= 0.0:
        raise ValueError("no mass accumulated by u: split point is degenerate")
    frac = t if orientation == "ratio" else 1.0 - t
    return float(_first_reach(s, np.array([frac * su]))[0])


def eta_u_regen(s: CumulativeProcess, u: float, grid=None) -> PathSample:
    """Bridge-type functional (S(t * Sinv(u)) - t*u)/sqrt(u).

    No closed-form limit scale is attached; estimate it from the ensemble.
    """
    grid = _default_or_check(grid)
    tv = generalized_inverse(s, u)
    vals = (np.asarray(s.value(grid * tv)) - grid * u) / math.sqrt(u)
    return PathSample(grid, vals, scale_hint=None)


def eta_u_area(
    s: CumulativeProcess, u: float, grid=None, orientation: str = "ratio"
) -> PathSample:
    """Centered split points as a path: (H_u(t) - t*u)/sqrt(u).

    Under the "displayed" orientation the centering flips to (1-t) * u,
    matching the complementary split that variant computes.
    """
    if orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}")
    grid = _default_or_check(grid)
    su = s.value(u)
    if su <= 0.0:
        raise ValueError("no mass accumulated by u: split points are degenerate")
    frac = grid if orientation == "ratio" else 1.0 - grid
    h = _first_reach(s, frac * su)
    center = grid * u if orientation == "ratio" else (1.0 - grid) * u
    return PathSample(grid, (h - center) / math.sqrt(u), scale_hint=None)


def _default_or_check(grid):
    from bridge_lab.renewal import default_grid

    return _check_unit_grid(default_grid() if grid is None else grid)
