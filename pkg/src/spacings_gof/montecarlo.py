"""Reproducible Monte Carlo validation of the asymptotic theory.

Stream derivation: replication r of a run with master seed s draws from a
dedicated counter-based generator Philox(key = (s, r)).  Replications are
therefore independent of execution order and thread count; reports reduce
over the replication index in fixed order, so identical configurations give
bit-identical reports at any parallelism (SPACINGS_GOF_THREADS caps the
worker count, default all cores).
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import asymptotics
from .alternatives import AlternativeModel, sample_values
from .asymptotics import TestSpec, effective_tuning
from .errors import DegenerateSpacingError, DomainError
from .spacings import SortedSample, SpacingsPlan, statistic
from .tuning import TuningFunction, builtin

#: degenerate replications (tied samples under float rounding) above this
#: fraction abort a run: a CLT check silently contaminated by substituted
#: values would be invisible.
DEGENERATE_ABORT_FRACTION = 1e-3


def substream(master_seed: int, index: int) -> np.random.Generator:
    """Philox stream keyed by (master_seed, replication index)."""
    key = np.array([np.uint64(master_seed & 0xFFFFFFFFFFFFFFFF),
                    np.uint64(index & 0xFFFFFFFFFFFFFFFF)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def thread_count() -> int:
    env = os.environ.get("SPACINGS_GOF_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SimulationConfig:
    n: int
    m: int
    plan: SpacingsPlan
    h: TuningFunction
    model: AlternativeModel | None
    reps: int
    master_seed: int
    alpha: float = 0.05

    def __post_init__(self):
        if self.reps < 100:
            raise DomainError("reps must be >= 100")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must be in (0, 1)")
        self.plan.validate_for(self.n)
        if self.model is not None and (self.model.n, self.model.m) != (self.n, self.m):
            raise DomainError(
                f"alternative was built for (n={self.model.n}, m={self.model.m}), "
                f"config has (n={self.n}, m={self.m})")


@dataclass(frozen=True)
class SimulationReport:
    study: str
    h_name: str
    m: int
    n: int
    mode: str
    scaling: str
    reps: int
    alpha: float
    master_seed: int
    empirical_mean: float
    empirical_var: float
    ks_to_normal: float | None = None
    rejection_rate: float | None = None
    rejection_se: float | None = None
    predicted_power: float | None = None
    correlations: dict | None = None
    deviations: dict | None = None
    degenerate_reps: int = 0
    runtime: float = 0.0  # informational; excluded from stable serialization

    def to_json_dict(self) -> dict:
        # fixed key order; runtime deliberately omitted so identical
        # configurations serialize byte-identically
        return {
            "study": self.study, "h": self.h_name, "m": self.m, "n": self.n,
            "mode": self.mode, "scaling": self.scaling, "reps": self.reps,
            "alpha": self.alpha, "master_seed": self.master_seed,
            "seed_derivation": "philox(key=(master_seed, replication))",
            "empirical_mean": self.empirical_mean,
            "empirical_var": self.empirical_var,
            "ks_to_normal": self.ks_to_normal,
            "rejection_rate": self.rejection_rate,
            "rejection_se": self.rejection_se,
            "predicted_power": self.predicted_power,
            "correlations": self.correlations,
            "deviations": self.deviations,
            "degenerate_reps": self.degenerate_reps,
        }


def _run_replications(fn, reps: int) -> tuple[np.ndarray, int]:
    """Fill out[r] = fn(r) in parallel; NaN marks a degenerate replication."""
    out = np.empty(reps)
    workers = min(thread_count(), reps)

    def work(lo_hi):
        lo, hi = lo_hi
        for r in range(lo, hi):
            try:
                out[r] = fn(r)
            except DegenerateSpacingError:
                out[r] = np.nan

    if workers <= 1:
        work((0, reps))
    else:
        step = -(-reps // workers)
        chunks = [(i, min(i + step, reps)) for i in range(0, reps, step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, chunks))
    bad = int(np.isnan(out).sum())
    if bad > DEGENERATE_ABORT_FRACTION * reps:
        raise DegenerateSpacingError(
            f"{bad}/{reps} replications degenerate (tied spacings); aborting")
    return out, bad


def _statistic_sampler(cfg: SimulationConfig):
    def fn(r):
        rng = substream(cfg.master_seed, r)
        vals = sample_values(cfg.model, cfg.n, rng)
        s = SortedSample(values=vals, n=cfg.n)
        return statistic(s, cfg.plan, cfg.h)

    return fn


def ks_distance_to_normal(standardized: np.ndarray) -> float:
    """sup_x |empirical CDF - Phi(x)| (raw distance, not a p-value)."""
    z = np.sort(standardized)
    n = z.size
    c = ndtr(z)
    i = np.arange(1, n + 1)
    return float(max((i / n - c).max(), (c - (i - 1) / n).max()))


def _finite(values: np.ndarray) -> np.ndarray:
    return values[~np.isnan(values)]


def null_distribution_study(cfg: SimulationConfig) -> SimulationReport:
    """Simulate the null statistic, standardize by the analytic (center,
    scale), and report the KS distance to the standard normal plus the
    empirical mean/variance of the standardized values and the size of the
    nominal-alpha test.  Standardization uses the analytic moments, not
    plug-in empirical ones: asymptotic normality is claimed for exactly that
    standardization."""
    if cfg.model is not None:
        raise DomainError("null study requires the null model")
    t0 = time.perf_counter()
    h_eff = effective_tuning(cfg.h, cfg.m, cfg.plan.scaling)
    center, scale, _ = asymptotics.standardization(h_eff, cfg.m, cfg.n, cfg.plan.mode)
    crit = asymptotics.critical_point(h_eff, cfg.m, cfg.n, cfg.alpha, cfg.plan.mode)
    raw, bad = _run_replications(_statistic_sampler(cfg), cfg.reps)
    vals = _finite(raw)
    z = (vals - center) / scale
    rate = float((vals > crit).mean())
    return SimulationReport(
        study="null", h_name=cfg.h.name, m=cfg.m, n=cfg.n, mode=cfg.plan.mode,
        scaling=cfg.plan.scaling, reps=cfg.reps, alpha=cfg.alpha,
        master_seed=cfg.master_seed,
        empirical_mean=float(z.mean()), empirical_var=float(z.var(ddof=1)),
        ks_to_normal=ks_distance_to_normal(z),
        rejection_rate=rate,
        rejection_se=math.sqrt(rate * (1 - rate) / vals.size) if vals.size else None,
        degenerate_reps=bad, runtime=time.perf_counter() - t0,
    )


def power_study(cfg: SimulationConfig) -> SimulationReport:
    """Rejection rate of the size-alpha test under the alternative, next to
    the asymptotic power prediction Phi(e ||l||_2^2 - u_alpha)."""
    if cfg.model is None:
        raise DomainError("power study requires an alternative model")
    t0 = time.perf_counter()
    h_eff = effective_tuning(cfg.h, cfg.m, cfg.plan.scaling)
    center, scale, _ = asymptotics.standardization(h_eff, cfg.m, cfg.n, cfg.plan.mode)
    crit = asymptotics.critical_point(h_eff, cfg.m, cfg.n, cfg.alpha, cfg.plan.mode)
    e2 = asymptotics.efficacy(h_eff, cfg.m, cfg.plan.mode).e2
    predicted = asymptotics.predicted_power(e2, cfg.model.l2norm2, cfg.alpha)
    raw, bad = _run_replications(_statistic_sampler(cfg), cfg.reps)
    vals = _finite(raw)
    z = (vals - center) / scale
    rate = float((vals > crit).mean())
    return SimulationReport(
        study="power", h_name=cfg.h.name, m=cfg.m, n=cfg.n, mode=cfg.plan.mode,
        scaling=cfg.plan.scaling, reps=cfg.reps, alpha=cfg.alpha,
        master_seed=cfg.master_seed,
        empirical_mean=float(z.mean()), empirical_var=float(z.var(ddof=1)),
        rejection_rate=rate,
        rejection_se=math.sqrt(rate * (1 - rate) / vals.size) if vals.size else None,
        predicted_power=predicted, degenerate_reps=bad,
        runtime=time.perf_counter() - t0,
    )


def correlation_study(h: TuningFunction, m: int, n: int, reps: int,
                      master_seed: int, alpha: float = 0.05) -> SimulationReport:
    """Empirical null correlation between the disjoint h-statistic and the
    disjoint greenwood statistic, for comparison with mu_m(h): the asymptotic
    power of the overlapping h-test is governed by exactly this correlation."""
    if n % m:
        raise DomainError(f"correlation study needs m | n (m={m}, n={n})")
    if reps < 100:
        raise DomainError("reps must be >= 100")
    t0 = time.perf_counter()
    plan = SpacingsPlan(m=m, mode="disjoint", scaling="by_n")
    g = builtin("greenwood")
    v_g = np.empty(reps)

    def fn(r):
        rng = substream(master_seed, r)
        vals = sample_values(None, n, rng)
        s = SortedSample(values=vals, n=n)
        v_g[r] = statistic(s, plan, g)
        return statistic(s, plan, h)

    raw, bad = _run_replications(fn, reps)
    ok = ~np.isnan(raw)
    v_h = raw[ok]
    v_gg = v_g[ok]
    corr = float(np.corrcoef(v_h, v_gg)[0, 1])
    mu = asymptotics.mu_m(h, m)
    z = (v_h - v_h.mean()) / v_h.std(ddof=1)
    return SimulationReport(
        study="corr", h_name=h.name, m=m, n=n, mode="disjoint", scaling="by_n",
        reps=reps, alpha=alpha, master_seed=master_seed,
        empirical_mean=float(v_h.mean()), empirical_var=float(v_h.var(ddof=1)),
        ks_to_normal=ks_distance_to_normal(z),
        correlations={"empirical": corr, "mu_m": mu},
        degenerate_reps=bad, runtime=time.perf_counter() - t0,
    )


def empirical_moment_check(cfg: SimulationConfig) -> SimulationReport:
    """Raw-statistic mean and variance against their asymptotic targets
    (count * A_i and n sigma^2, resp. N sigma*^2), as relative ratios."""
    t0 = time.perf_counter()
    h_eff = effective_tuning(cfg.h, cfg.m, cfg.plan.scaling)
    ms = asymptotics.moments(h_eff, cfg.m)
    if cfg.plan.mode == "overlapping":
        count, var_target = cfg.n, cfg.n * ms.sigma2
    else:
        count, var_target = cfg.n // cfg.m, (cfg.n // cfg.m) * ms.sigma_star2
    if cfg.model is None:
        mean_target = count * ms.mean_h
    else:
        mean_target = count * asymptotics.shifted_mean(
            h_eff, cfg.m, cfg.n, cfg.model.l2norm2)
    raw, bad = _run_replications(_statistic_sampler(cfg), cfg.reps)
    vals = _finite(raw)
    mean, var = float(vals.mean()), float(vals.var(ddof=1))
    return SimulationReport(
        study="moments", h_name=cfg.h.name, m=cfg.m, n=cfg.n,
        mode=cfg.plan.mode, scaling=cfg.plan.scaling, reps=cfg.reps,
        alpha=cfg.alpha, master_seed=cfg.master_seed,
        empirical_mean=mean, empirical_var=var,
        deviations={
            "mean_target": mean_target, "var_target": var_target,
            "mean_ratio": mean / mean_target if mean_target else math.nan,
            "var_ratio": var / var_target if var_target else math.nan,
            "mean_shift": mean - count * ms.mean_h,
        },
        degenerate_reps=bad, runtime=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Sample-size matching (finite-n Pitman proxy)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatchResult:
    ratio: float
    ci_low: float
    ci_high: float
    n1: int
    n2: int
    power1: float
    power2: float
    target_power: float
    delta: float

    def to_json_dict(self) -> dict:
        return {"ratio": self.ratio, "ci_low": self.ci_low,
                "ci_high": self.ci_high, "n1": self.n1, "n2": self.n2,
                "power1": self.power1, "power2": self.power2,
                "target_power": self.target_power, "delta": self.delta}


def _feasible(spec: TestSpec, n: int) -> int:
    if spec.mode == "disjoint":
        return max(spec.m * 2, spec.m * round(n / spec.m))
    return max(spec.m + 1, n)


def _sim_power(spec: TestSpec, n: int, model: AlternativeModel, alpha: float,
               reps: int, seed: int) -> float:
    plan = SpacingsPlan(m=spec.m, mode=spec.mode, scaling="by_n")
    center, scale, _ = asymptotics.standardization(spec.h, spec.m, n, spec.mode)
    crit = asymptotics.upper_quantile(alpha) * scale + center

    def fn(r):
        rng = substream(seed, r)
        vals = sample_values(model, n, rng)
        return statistic(SortedSample(values=vals, n=n), plan, spec.h)

    raw, _ = _run_replications(fn, reps)
    return float((_finite(raw) > crit).mean())


def _predicted_power_fixed_delta(spec: TestSpec, n: int, l2: float,
                                 delta: float, alpha: float) -> float:
    # the fixed alternative 1 + delta*l seen at sample size n has effective
    # local norm l2 * delta^2 * sqrt(n m)
    e2 = asymptotics.efficacy(spec.h, spec.m, spec.mode).e2
    eff_l2 = l2 * delta * delta * math.sqrt(n * spec.m)
    return asymptotics.predicted_power(e2, eff_l2, alpha)


def _solve_n(spec: TestSpec, model: AlternativeModel, target: float,
             alpha: float, reps: int, seed: int) -> tuple[int, float]:
    """Smallest-ish n whose simulated power matches the target, by bisection
    seeded from the asymptotic prediction."""
    delta, l2 = model.delta, model.l2norm2
    e2 = asymptotics.efficacy(spec.h, spec.m, spec.mode).e2
    x = asymptotics.upper_quantile(alpha) + asymptotics.upper_quantile(1.0 - target)
    guess = (x / (math.sqrt(e2) * l2 * delta * delta)) ** 2 / spec.m
    lo = _feasible(spec, max(spec.m + 1, int(guess / 4)))
    hi = _feasible(spec, int(guess * 4) + 4 * spec.m)
    cap = 1 << 22
    se = math.sqrt(target * (1 - target) / reps)
    p_lo = _sim_power(spec, lo, model, alpha, reps, seed)
    while p_lo > target and lo > spec.m + 1:
        lo = _feasible(spec, lo // 2)
        p_lo = _sim_power(spec, lo, model, alpha, reps, seed + 1)
    p_hi = _sim_power(spec, hi, model, alpha, reps, seed + 2)
    while p_hi < target:
        if hi > cap:
            raise DomainError(
                f"target power {target} unreachable at feasible sample sizes "
                f"for {spec.h.name} ({spec.mode}); best {p_hi:.3f} at n={hi}")
        hi = _feasible(spec, hi * 2)
        p_hi = _sim_power(spec, hi, model, alpha, reps, seed + 3)
    k = 4
    while hi - lo > max(spec.m, 0.02 * hi):
        mid = _feasible(spec, (lo + hi) // 2)
        if mid in (lo, hi):
            break
        p = _sim_power(spec, mid, model, alpha, reps, seed + k)
        k += 1
        if abs(p - target) <= se:
            return mid, p
        if p < target:
            lo, p_lo = mid, p
        else:
            hi, p_hi = mid, p
    # linear interpolation on the final bracket
    if p_hi != p_lo:
        t = (target - p_lo) / (p_hi - p_lo)
    else:
        t = 0.5
    n = _feasible(spec, int(round(lo + t * (hi - lo))))
    return n, _sim_power(spec, n, model, alpha, reps, seed + k)


def sample_size_match(spec1: TestSpec, spec2: TestSpec, target_power: float,
                      alpha: float, model_kind: str = "cosine",
                      model_params=(1, 2.0), reps: int = 3000,
                      master_seed: int = 951, ref_n: int = 2000) -> MatchResult:
    """Finite-n sample-size ratio: how much larger a sample the second test
    needs to match the first test's power against one fixed alternative.

    A single physical alternative 1 + delta*l (delta frozen at
    (ref_n * m1)^(-1/4)) is faced by both tests; n is tuned by simulated
    bisection for each.  The returned ratio n2/n1 is the finite-n analogue of
    the Pitman efficiency, with a delta-method CI from the binomial noise of
    the two power estimates through the analytic power slope."""
    if not alpha < target_power < 1:
        raise DomainError("target_power must be in (alpha, 1)")
    from .alternatives import make_alternative

    delta = (ref_n * spec1.m) ** -0.25
    model = make_alternative(model_kind, model_params, ref_n, spec1.m,
                             delta_override=delta)
    n1, p1 = _solve_n(spec1, model, target_power, alpha,
                      reps, master_seed * 1_000_003 + 1)
    n2, p2 = _solve_n(spec2, model, target_power, alpha,
                      reps, master_seed * 1_000_003 + 2)
    ratio = n2 / n1
    rel = 0.0
    for spec, n, p in ((spec1, n1, p1), (spec2, n2, p2)):
        se_p = math.sqrt(max(p * (1 - p), 1e-9) / reps)
        e2 = asymptotics.efficacy(spec.h, spec.m, spec.mode).e2
        eff = model.l2norm2 * delta * delta * math.sqrt(n * spec.m)
        arg = math.sqrt(e2) * eff - asymptotics.upper_quantile(alpha)
        slope = math.exp(-arg * arg / 2) / math.sqrt(2 * math.pi) \
            * math.sqrt(e2) * model.l2norm2 * delta * delta \
            * math.sqrt(spec.m / n) / 2.0
        rel += (se_p / (slope * n)) ** 2
    half = 1.96 * math.sqrt(rel)
    return MatchResult(ratio=ratio, ci_low=ratio * (1 - half),
                       ci_high=ratio * (1 + half), n1=n1, n2=n2,
                       power1=p1, power2=p2, target_power=target_power,
                       delta=delta)
