"""Brownian-bridge reference laws and the convergence test battery.

The bridge is the centered Gaussian process on [0, 1] pinned to zero at
both ends, with covariance min(s, t) - s*t.  This module draws exact
bridge paths (the oracle everything else is measured against), exposes the
marginal and sup-norm laws in closed form, estimates the scale constant of
an ensemble when theory does not supply one, and runs the hypothesis-test
battery certifying that an ensemble of rescaled simulation paths is
statistically indistinguishable from c * bridge, or from its absolute
value in the folded case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from bridge_lab.rng_dist import RandomStream

# A maximum taken over a grid undershoots the supremum of the underlying
# path by beta * sigma * sqrt(gap) on average, beta = -zeta(1/2)/sqrt(2*pi).
# The sup-norm statistic is de-biased by this amount before being compared
# with the continuous-path law.
GRID_SUP_BETA = 0.5825971579390107

# Systematic KS tolerance for the sup-norm test: residual discretization
# error not removed by the mean correction is absorbed by accepting any
# fit within this distance of the reference law.
SUP_KS_TOLERANCE = 0.05


def bridge_cov(s, t):
    """Covariance min(s, t) - s*t of the standard bridge; vectorized."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.minimum(s, t) - s * t
    if out.ndim == 0:
        return float(out)
    return out


def _check_grid(grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must be a 1-d array with at least two points")
    if grid[0] < 0.0 or grid[-1] > 1.0:
        raise ValueError("grid must lie within [0, 1]")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    return grid


def sample_bridge(stream: RandomStream, grid) -> np.ndarray:
    """Draw one exact bridge path on ``grid``.

    A Brownian path W is built from independent Gaussian increments over
    the grid gaps (extended to t = 1 if the grid stops short), and the
    bridge is read off as W_t - t * W_1, which pins both ends exactly.
    """
    return sample_bridge_ensemble(stream, grid, 1)[0]


def sample_bridge_ensemble(stream: RandomStream, grid, m: int) -> np.ndarray:
    """Draw ``m`` independent bridge paths on ``grid``, one per row."""
    grid = _check_grid(grid)
    times = grid
    extended = grid[-1] < 1.0
    if extended:
        times = np.append(grid, 1.0)
    gaps = np.diff(times, prepend=0.0)
    z = stream.normals(m * times.size).reshape(m, times.size)
    w = np.cumsum(z * np.sqrt(gaps), axis=1)
    w1 = w[:, -1]
    if extended:
        w = w[:, :-1]
    out = w - np.outer(w1, times[: grid.size])
    # Pin the endpoints exactly rather than up to roundoff.
    out[:, grid == 0.0] = 0.0
    out[:, grid == 1.0] = 0.0
    return out


def kolmogorov_cdf(x: float) -> float:
    """CDF of sup |bridge|: 1 - 2*sum((-1)^(k-1) * exp(-2 k^2 x^2)).

    The alternating series is truncated once a term drops below 1e-12 and
    the result clamped to [0, 1] (cancellation near zero can leave tiny
    negative residue).
    """
    if x < 0:
        raise ValueError("sup-norm statistic cannot be negative")
    if x == 0.0:
        return 0.0
    total = 0.0
    sign = 1.0
    for k in range(1, 1000):
        term = math.exp(-2.0 * k * k * x * x)
        if term < 1e-12:
            break
        total += sign * term
        sign = -sign
    return min(1.0, max(0.0, 1.0 - 2.0 * total))


def normal_cdf(x):
    """Standard normal CDF; vectorized."""
    out = ndtr(np.asarray(x, dtype=float))
    if out.ndim == 0:
        return float(out)
    return out


def folded_normal_cdf(x, scale: float):
    """CDF of |Z| for Z ~ Normal(0, scale^2): 2*Phi(x/scale) - 1 on x >= 0."""
    if scale <= 0:
        raise ValueError("folded normal scale must be positive")
    x = np.asarray(x, dtype=float)
    out = np.where(x < 0.0, 0.0, 2.0 * ndtr(x / scale) - 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def ks_test(sample, cdf) -> tuple[float, float]:
    """One-sample Kolmogorov-Smirnov test against a continuous CDF.

    Returns (D, p) with D = max over the sorted sample of
    max(i/n - F(x_i), F(x_i) - (i-1)/n) and the asymptotic p-value
    1 - kolmogorov_cdf(sqrt(n) * D).
    """
    xs = np.sort(np.asarray(sample, dtype=float))
    n = xs.size
    if n == 0:
        raise ValueError("cannot run a KS test on an empty sample")
    try:
        f = np.asarray(cdf(xs), dtype=float)
        if f.shape != xs.shape:
            raise TypeError
    except (TypeError, ValueError):
        f = np.array([cdf(x) for x in xs], dtype=float)
    i = np.arange(1, n + 1)
    d = float(max((i / n - f).max(), (f - (i - 1) / n).max()))
    return d, 1.0 - kolmogorov_cdf(math.sqrt(n) * d)


@dataclass
class PathEnsemble:
    """M simulated paths sharing one t-grid in [0, 1].

    ``scale_hint`` carries the theoretical limit scale c when a theorem
    supplies one, and ``folded`` marks ensembles whose target is |c * bridge|
    rather than the signed bridge.
    """

    grid: np.ndarray
    matrix: np.ndarray
    scale_hint: float | None = None
    folded: bool = False

    def __post_init__(self) -> None:
        self.grid = _check_grid(self.grid)
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.ndim != 2:
            raise ValueError("matrix must be 2-d (replicates by grid points)")
        if self.matrix.shape[1] != self.grid.size:
            raise ValueError("matrix width must equal grid size")
        if self.matrix.shape[0] < 2:
            raise ValueError("need at least two replicates")

    @property
    def m(self) -> int:
        return self.matrix.shape[0]


@dataclass
class TestEntry:
    """One line of a certification report."""

    name: str
    statistic: float
    p_value: float | None
    threshold: float
    verdict: str  # "pass" or "fail"
    mandatory: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "threshold": self.threshold,
            "verdict": self.verdict,
            "mandatory": self.mandatory,
            "note": self.note,
        }


@dataclass
class BridgeTestReport:
    """Battery outcome: per-test entries plus an overall verdict.

    The overall verdict is "pass" exactly when every mandatory entry
    passed; informational entries are reported but cannot fail the run.
    """

    entries: list[TestEntry]
    overall: str
    metadata: dict = field(default_factory=dict)

    def entry(self, name: str) -> TestEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "tests": [e.to_dict() for e in self.entries],
            "metadata": self.metadata,
        }

    def format_table(self) -> str:
        lines = [
            f"{'test':<28} {'statistic':>12} {'p-value':>10} "
            f"{'threshold':>10} {'':>5} verdict"
        ]
        for e in self.entries:
            p = "-" if e.p_value is None else f"{e.p_value:.4g}"
            tag = "" if e.mandatory else "info-"
            lines.append(
                f"{e.name:<28} {e.statistic:>12.6g} {p:>10} "
                f"{e.threshold:>10.4g} {'':>5} {tag}{e.verdict}"
            )
        lines.append(f"overall: {self.overall}")
        return "\n".join(lines)


def estimate_scale(ens: PathEnsemble) -> float:
    """Estimate the limit scale c from the spread at t = 1/2.

    Var(c * bridge at 1/2) = c^2/4, so c is twice the standard deviation
    of the midpoint column; for folded ensembles the root mean square
    replaces the standard deviation (the folded mean is not zero).
    Returns 0 for a degenerate (all-zero) column.
    """
    if ens.m < 100:
        raise ValueError("scale estimation needs at least 100 replicates")
    idx = np.flatnonzero(np.isclose(ens.grid, 0.5, atol=1e-9))
    if idx.size == 0:
        raise ValueError("grid has no t = 1/2 column to estimate scale from")
    col = ens.matrix[:, idx[0]]
    if ens.folded:
        return 2.0 * math.sqrt(float(np.mean(col * col)))
    return 2.0 * float(np.std(col, ddof=1))


def folded_corr(rho):
    """Correlation of (|X|, |Y|) for standard bivariate normals with corr rho."""
    rho = np.clip(np.asarray(rho, dtype=float), -1.0, 1.0)
    num = np.sqrt(1.0 - rho * rho) + rho * np.arcsin(rho) - 1.0
    out = num / (math.pi / 2.0 - 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def _bridge_corr_matrix(ts: np.ndarray) -> np.ndarray:
    s = ts[:, None]
    t = ts[None, :]
    cov = np.minimum(s, t) - s * t
    sd = np.sqrt(ts * (1.0 - ts))
    return cov / np.outer(sd, sd)


def correlation_deviation(ens: PathEnsemble) -> float:
    """Largest gap between empirical and bridge correlation, interior grid.

    Scale-free by construction; folded ensembles are compared against the
    correlation of the folded bridge.  Returns 0 when fewer than two grid
    points fall inside [0.1, 0.9].
    """
    interior = np.flatnonzero((ens.grid >= 0.1) & (ens.grid <= 0.9))
    if interior.size < 2:
        return 0.0
    ts = ens.grid[interior]
    emp = np.corrcoef(ens.matrix[:, interior], rowvar=False)
    ref = _bridge_corr_matrix(ts)
    if ens.folded:
        ref = folded_corr(ref)
    iu = np.triu_indices(ts.size, k=1)
    return float(np.abs(emp[iu] - ref[iu]).max())


def default_eps_pin(c: float, grid: np.ndarray, size_param: float) -> float:
    """Endpoint pinning threshold: 3*c*max(grid gap) + 5/sqrt(size)."""
    return 3.0 * c * float(np.diff(grid).max()) + 5.0 / math.sqrt(size_param)


def test_bridge(
    ens: PathEnsemble,
    alpha: float = 0.01,
    scale_mode: str = "theoretical",
    eps_pin: float | None = None,
    size_param: float | None = None,
    delta_corr: float | None = None,
    seed: int | None = None,
) -> BridgeTestReport:
    """Certify an ensemble against the c * bridge (or |c * bridge|) target.

    The battery runs, with c taken from ``scale_mode``:

    1. endpoint pinning: mean |value| at t in {0, 1} below ``eps_pin``
       (default 3*c*max gap + 5/sqrt(size_param), the caller's known bound
       on the pinning error of its scenario);
    2. mean zero: every column mean within 4 standard errors of zero;
    3. marginal KS at t near {1/4, 1/2, 3/4} against the normal (or
       folded normal) marginal law, the three locations sharing level
       ``alpha`` (each is compared at alpha/3, so the clause as a whole
       rejects a true bridge with probability at most alpha);
    4. correlation shape: max deviation of the interior empirical
       correlation matrix from the bridge correlation, threshold
       ``delta_corr`` (default sqrt(5/M): 0.10 at M = 500, 0.05 at
       M = 2000).  Scale-free, reported always, binding only when the
       scale is estimated;
    5. sup norm (signed ensembles only): KS of the de-biased grid maximum
       of |path|/c against the sup law, accepted when p >= alpha or the
       distance is within SUP_KS_TOLERANCE.

    Degenerate ensembles (no spread, or c = 0) fail with a reason entry.
    """
    if scale_mode not in ("theoretical", "estimated"):
        raise ValueError("scale_mode must be 'theoretical' or 'estimated'")
    if ens.m < 500:
        raise ValueError("distributional battery needs at least 500 replicates")
    grid = ens.grid
    mat = ens.matrix
    m = ens.m
    meta = {
        "M": m,
        "K": int(grid.size),
        "alpha": alpha,
        "scale_mode": scale_mode,
        "folded": ens.folded,
        "seed": seed,
    }

    def report(entries: list[TestEntry]) -> BridgeTestReport:
        ok = all(e.verdict == "pass" for e in entries if e.mandatory)
        return BridgeTestReport(entries, "pass" if ok else "fail", meta)

    spread = float(np.std(mat))
    if spread == 0.0:
        meta["scale"] = 0.0
        entry = TestEntry(
            "degenerate", 0.0, None, 0.0, "fail", note="ensemble has zero variance"
        )
        return report([entry])

    if scale_mode == "theoretical":
        if ens.scale_hint is None:
            raise ValueError("theoretical scale_mode needs a scale_hint")
        c = float(ens.scale_hint)
    else:
        c = estimate_scale(ens)
    meta["scale"] = c
    if c <= 0.0:
        entry = TestEntry(
            "degenerate", c, None, 0.0, "fail", note="scale is not positive"
        )
        return report([entry])

    entries: list[TestEntry] = []

    # 1. endpoint pinning
    if size_param is None:
        size_param = float(m)
    if eps_pin is None:
        eps_pin = default_eps_pin(c, grid, size_param)
    end_cols = np.flatnonzero((grid == 0.0) | (grid == 1.0))
    if end_cols.size:
        stat = float(np.abs(mat[:, end_cols]).mean(axis=0).max())
        entries.append(
            TestEntry(
                "endpoint-pinning",
                stat,
                None,
                eps_pin,
                "pass" if stat <= eps_pin else "fail",
            )
        )

    # 2. per-column mean against the target law's mean (zero for the signed
    # bridge, c*sd*sqrt(2/pi) for the folded one).  Runs on the interior
    # columns only: at the endpoints the residual pinning error has a
    # deterministic sign, so its mean and spread shrink at the same rate
    # and the z-score would grow like sqrt(M) no matter how converged the
    # ensemble is.  The endpoints belong to the pinning test.
    inner = (grid > 0.0) & (grid < 1.0)
    means = mat.mean(axis=0)
    stds = mat.std(axis=0, ddof=1)
    target_mean = np.zeros_like(means)
    if ens.folded:
        target_mean = c * np.sqrt(grid * (1.0 - grid)) * math.sqrt(2.0 / math.pi)
    live = inner & (stds > 0)
    zmax = 0.0
    if live.any():
        dev = np.abs(means[live] - target_mean[live])
        zmax = float((dev * math.sqrt(m) / stds[live]).max())
    dead_shifted = bool(np.any(inner & ~live & (means != target_mean)))
    entries.append(
        TestEntry(
            "mean-zero",
            zmax,
            None,
            4.0,
            "fail" if dead_shifted or zmax > 4.0 else "pass",
            note="max deviation from the target mean, in standard errors",
        )
    )

    # 3. marginal KS at the quartile points.  The three locations share
    # the level alpha via a Bonferroni split: without it the clause alone
    # would reject a perfectly sampled bridge about 3 times too often.
    level = alpha / 3.0
    for target in (0.25, 0.5, 0.75):
        j = int(np.argmin(np.abs(grid - target)))
        t = float(grid[j])
        sd = c * math.sqrt(t * (1.0 - t))
        col = mat[:, j]
        if ens.folded:
            d, p = ks_test(col, lambda x, s=sd: folded_normal_cdf(x, s))
        else:
            d, p = ks_test(col, lambda x, s=sd: normal_cdf(np.asarray(x) / s))
        entries.append(
            TestEntry(
                f"marginal-ks-{target:g}",
                d,
                p,
                level,
                "pass" if p >= level else "fail",
                note=f"grid point t = {t:g}",
            )
        )

    # 4. correlation shape on the interior of the grid
    interior = np.flatnonzero((grid >= 0.1) & (grid <= 0.9))
    if interior.size >= 2:
        stat = correlation_deviation(ens)
        if delta_corr is None:
            delta_corr = math.sqrt(5.0 / m)
        entries.append(
            TestEntry(
                "correlation-shape",
                stat,
                None,
                delta_corr,
                "pass" if stat <= delta_corr else "fail",
                mandatory=(scale_mode == "estimated"),
                note="folded target" if ens.folded else "",
            )
        )

    # 5. sup-norm law (signed ensembles only)
    if not ens.folded:
        gap = float(np.diff(grid).max())
        sups = np.abs(mat).max(axis=1) / c + GRID_SUP_BETA * math.sqrt(gap)
        d, p = ks_test(sups, kolmogorov_cdf)
        ok = p >= alpha or d <= SUP_KS_TOLERANCE
        entries.append(
            TestEntry(
                "sup-norm-ks",
                d,
                p,
                SUP_KS_TOLERANCE,
                "pass" if ok else "fail",
                note="grid maximum de-biased by beta*sqrt(gap)",
            )
        )

    return report(entries)
