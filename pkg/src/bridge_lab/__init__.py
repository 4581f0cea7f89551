"""Monte Carlo laboratory for Brownian-bridge limits of cumulative processes.

The package simulates renewal, regenerative, combinatorial and geometric
models whose centered and rescaled paths approach a Brownian bridge, and
ships the statistical machinery to test that convergence on ensembles of
simulated paths.
"""

from bridge_lab.rng_dist import (
    DistributionSpec,
    RandomStream,
    derive_stream_id,
    dist_moments,
    make_stream,
    sample_gaussian,
    sample_positive,
)

__all__ = [
    "DistributionSpec",
    "RandomStream",
    "derive_stream_id",
    "dist_moments",
    "make_stream",
    "sample_gaussian",
    "sample_positive",
]

__version__ = "0.1.0"
