"""Scenario configs and seeded ensemble construction for every path kind.

A scenario names one of the eight path constructions, its distribution or
driver parameters, its size parameter and the certification settings.
Replicate r always draws from the stream labeled "<scenario>:<r>" under
the master seed, so the ensemble is reproducible replicate by replicate
and independent of how replicates are distributed over workers.
"""

from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass

import numpy as np

from bridge_lab.bridge_stats import PathEnsemble
from bridge_lab.digraph import digraph_bridge_process, generate_digraph
from bridge_lab.regen import (
    CycleGenerator,
    DriverSpec,
    area_process,
    build_regenerative,
    eta_u_area,
    eta_u_regen,
    simulate_reflected,
)
from bridge_lab.renewal import (
    default_grid,
    eta_prime_n,
    eta_u,
    simulate_n_epochs,
    simulate_renewal,
    xi_n,
)
from bridge_lab.rng_dist import DistributionSpec, derive_stream_id, make_stream
from bridge_lab.voronoi import d_process, sample_poisson, segment_window

SCENARIO_KINDS = (
    "renewal-eta",
    "renewal-eta-prime",
    "renewal-xi",
    "regen-inverse",
    "area-split",
    "levy-area",
    "digraph",
    "voronoi",
)

# one-line target descriptions for the listing command
SCENARIO_SUMMARIES = {
    "renewal-eta": "epochs read at a count fraction; target: bridge, scale sigma/sqrt(mu)",
    "renewal-eta-prime": "counts read at an epoch fraction; target: bridge, scale sigma/mu",
    "renewal-xi": "centered counting path; target: free Brownian motion, scale sigma/mu^1.5 (no pinning)",
    "regen-inverse": "cumulative mass read through its inverse; target: bridge, estimated scale",
    "area-split": "reflected Brownian area split; target: bridge, estimated scale",
    "levy-area": "area split with a jump-diffusion driver; target: bridge, estimated scale",
    "digraph": "longest-path level counts of a random DAG; target: bridge, estimated scale",
    "voronoi": "scaled nearest-site cell distances; target: folded bridge, estimated scale",
}

_RENEWAL_KINDS = ("renewal-eta", "renewal-eta-prime", "renewal-xi")
_DIST_KEYS = ("dist", "rate", "low", "high", "value", "p_low", "shape", "scale")
_COMMON_KEYS = ("scenario", "M", "seed", "K", "alpha", "scale_mode", "delta_corr")
_KIND_KEYS = {
    "renewal-eta": _DIST_KEYS + ("u",),
    "renewal-eta-prime": _DIST_KEYS + ("n",),
    "renewal-xi": _DIST_KEYS + ("n",),
    "regen-inverse": _DIST_KEYS + ("u", "mass_rate"),
    "area-split": ("u", "dt", "sigma", "orientation"),
    "levy-area": ("u", "dt", "sigma", "jump_rate", "orientation"),
    "digraph": ("n", "p", "variant"),
    "voronoi": ("x_norm",),
}
_DEFAULT_SCALE_MODE = {
    "renewal-eta": "theoretical",
    "renewal-eta-prime": "theoretical",
    "renewal-xi": "theoretical",
    "regen-inverse": "estimated",
    "area-split": "estimated",
    "levy-area": "estimated",
    "digraph": "estimated",
    "voronoi": "estimated",
}


@dataclass
class ScenarioConfig:
    scenario: str
    M: int
    seed: int
    K: int = 21
    alpha: float = 0.01
    scale_mode: str | None = None
    delta_corr: float | None = None
    dist: DistributionSpec | None = None
    u: float | None = None
    n: int | None = None
    p: float | None = None
    x_norm: float | None = None
    dt: float = 0.01
    sigma: float = 1.0
    jump_rate: float = 1.0
    mass_rate: float = 1.0
    variant: str = "cumulative"
    orientation: str = "ratio"

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.M < 2:
            raise ValueError("replicate count must be at least 2")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.K < 2:
            raise ValueError("grid size must be at least 2")
        if not 0.0 < self.alpha <= 0.5:
            raise ValueError("alpha must lie in (0, 0.5]")
        if self.scale_mode is None:
            self.scale_mode = _DEFAULT_SCALE_MODE[self.scenario]
        if self.scale_mode not in ("theoretical", "estimated"):
            raise ValueError("scale_mode must be 'theoretical' or 'estimated'")
        kind = self.scenario
        if kind in _RENEWAL_KINDS or kind == "regen-inverse":
            if self.dist is None:
                raise ValueError(f"{kind} needs a spacing distribution")
        if kind in ("renewal-eta", "regen-inverse", "area-split", "levy-area"):
            if self.u is None or self.u <= 0:
                raise ValueError(f"{kind} needs a positive size u")
        if kind in ("renewal-eta-prime", "renewal-xi", "digraph"):
            if self.n is None or self.n < 1:
                raise ValueError(f"{kind} needs a positive count n")
        if kind == "digraph" and (self.p is None or not 0.0 < self.p < 1.0):
            raise ValueError("digraph needs an edge probability in (0, 1)")
        if kind == "voronoi" and (self.x_norm is None or self.x_norm <= 0):
            raise ValueError("voronoi needs a positive query norm")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.sigma < 0 or (kind == "area-split" and self.sigma <= 0):
            raise ValueError("driver sigma must be positive")
        if self.jump_rate <= 0 or self.mass_rate <= 0:
            raise ValueError("rates must be positive")
        if self.variant not in ("cumulative", "tail"):
            raise ValueError("variant must be 'cumulative' or 'tail'")
        if self.orientation not in ("ratio", "displayed"):
            raise ValueError("orientation must be 'ratio' or 'displayed'")

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        """Build from a flat JSON document, rejecting unknown keys."""
        if not isinstance(raw, dict):
            raise ValueError("config must be a JSON object")
        kind = raw.get("scenario")
        if kind not in SCENARIO_KINDS:
            raise ValueError(
                f"config needs a 'scenario' key, one of {', '.join(SCENARIO_KINDS)}"
            )
        allowed = set(_COMMON_KEYS) | set(_KIND_KEYS[kind])
        unknown = sorted(set(raw) - allowed)
        if unknown:
            raise ValueError(
                f"unknown config keys for {kind}: {', '.join(unknown)}"
            )
        for key in ("M", "seed"):
            if key not in raw:
                raise ValueError(f"config needs the '{key}' key")
        if int(raw["M"]) < 500:
            raise ValueError("certification needs at least 500 replicates")
        kwargs = {k: v for k, v in raw.items() if k not in _DIST_KEYS}
        if "dist" in allowed and "dist" in raw:
            params = {k: raw[k] for k in _DIST_KEYS[1:] if k in raw}
            kwargs["dist"] = DistributionSpec(raw["dist"], **params)
        elif any(k in raw for k in _DIST_KEYS[1:]):
            raise ValueError("distribution parameters given without a 'dist' kind")
        kwargs["M"] = int(raw["M"])
        kwargs["seed"] = int(raw["seed"])
        if "n" in kwargs and kwargs["n"] is not None:
            kwargs["n"] = int(kwargs["n"])
        if "K" in kwargs:
            kwargs["K"] = int(kwargs["K"])
        return cls(**kwargs)

    def size_param(self) -> float:
        """The scenario's own size, used for pinning-error budgets.

        For the digraph the start-point error is (1/p)/sqrt(n), so the
        comparable size is p^2 * n rather than n itself.
        """
        kind = self.scenario
        if kind in ("renewal-eta", "regen-inverse", "area-split", "levy-area"):
            return float(self.u)
        if kind == "digraph":
            return float(self.p) ** 2 * float(self.n)
        if kind == "voronoi":
            return float(self.x_norm)
        return float(self.n)


@dataclass
class EnsembleExtras:
    """Side information the runner needs beyond the raw ensemble."""

    size_param: float
    degenerate: bool = False
    degenerate_note: str = ""
    degenerate_bound: float = 0.0
    alt_matrix: np.ndarray | None = None
    alt_variant: str = ""


def _stream_for(config: ScenarioConfig, r: int):
    return make_stream(config.seed, derive_stream_id(f"{config.scenario}:{r}"))


def _regen_process(config: ScenarioConfig, stream):
    mass = DistributionSpec("exponential", rate=config.mass_rate)
    gen = CycleGenerator("atom", config.dist, mass)
    mu, _ = config.dist.moments()
    cycles = config.u * config.mass_rate
    horizon = mu * (cycles + 10.0 * math.sqrt(cycles) + 10.0)
    s = build_regenerative(stream, gen, horizon)
    attempt = 0
    while s.total <= config.u:
        attempt += 1
        horizon *= 1.6
        s = build_regenerative(stream.split(f"grow{attempt}"), gen, horizon)
    return s


def simulate_replicate(config: ScenarioConfig, r: int):
    """Values of replicate r on the grid, plus any variant companion."""
    stream = _stream_for(config, r)
    grid = default_grid(config.K)
    kind = config.scenario
    alt = None
    if kind == "renewal-eta":
        path = simulate_renewal(stream, config.dist, config.u)
        values = eta_u(path, config.u, grid).values
    elif kind == "renewal-eta-prime":
        path = simulate_n_epochs(stream, config.dist, config.n)
        values = eta_prime_n(path, config.n, grid).values
    elif kind == "renewal-xi":
        path = simulate_renewal(stream, config.dist, float(config.n))
        values = xi_n(path, config.n, grid).values
    elif kind == "regen-inverse":
        s = _regen_process(config, stream)
        values = eta_u_regen(s, config.u, grid).values
    elif kind in ("area-split", "levy-area"):
        if kind == "levy-area":
            driver = DriverSpec(
                "levy",
                sigma=config.sigma,
                jump_rate=config.jump_rate,
                jump_dist=DistributionSpec("exponential", rate=1.0),
            )
        else:
            driver = DriverSpec("brownian", sigma=config.sigma)
        # the split points all sit at or before time u, so the path only
        # needs to cover [0, u]
        s = area_process(simulate_reflected(stream, driver, config.u, config.dt))
        values = eta_u_area(s, config.u, grid, config.orientation).values
    elif kind == "digraph":
        graph = generate_digraph(stream, config.n, config.p)
        values = digraph_bridge_process(graph, grid, config.variant).values
        other = "tail" if config.variant == "cumulative" else "cumulative"
        alt = digraph_bridge_process(graph, grid, other).values
    else:
        x = np.array([float(config.x_norm), 0.0])
        cloud = sample_poisson(stream, segment_window(x))
        values = d_process(cloud, x, grid).values
    return values, alt


def _replicate_star(args):
    return simulate_replicate(*args)


def theoretical_scale(config: ScenarioConfig) -> float | None:
    """The limit scale when the theorem supplies one, else None."""
    if config.scenario not in _RENEWAL_KINDS:
        return None
    mu, var = config.dist.moments()
    sigma = math.sqrt(var)
    if config.scenario == "renewal-eta":
        return sigma / math.sqrt(mu)
    if config.scenario == "renewal-eta-prime":
        return sigma / mu
    return sigma / mu**1.5


def build_ensemble(
    config: ScenarioConfig, workers: int = 1
) -> tuple[PathEnsemble, EnsembleExtras]:
    """Simulate all replicates (optionally in a worker pool)."""
    tasks = [(config, r) for r in range(config.M)]
    if workers > 1:
        with multiprocessing.Pool(workers) as pool:
            rows = pool.map(_replicate_star, tasks, chunksize=max(1, config.M // (4 * workers)))
    else:
        rows = [simulate_replicate(config, r) for r in range(config.M)]
    matrix = np.vstack([row[0] for row in rows])
    grid = default_grid(config.K)
    scale = theoretical_scale(config)
    folded = config.scenario == "voronoi"
    ens = PathEnsemble(grid, matrix, scale_hint=scale, folded=folded)
    extras = EnsembleExtras(size_param=config.size_param())
    if scale is not None and scale == 0.0:
        extras.degenerate = True
        extras.degenerate_note = (
            "spacing distribution has zero variance, the limit scale vanishes"
        )
        extras.degenerate_bound = 2.0 * config.dist.moments()[0] / math.sqrt(
            extras.size_param
        )
    if config.scenario == "digraph":
        extras.alt_matrix = np.vstack([row[1] for row in rows])
        extras.alt_variant = "tail" if config.variant == "cumulative" else "cumulative"
    return ens, extras
