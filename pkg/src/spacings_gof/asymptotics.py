"""Asymptotic moments, efficacies, critical points, and Pitman efficiencies.

Under the Gamma representation, every null moment of a spacings statistic is
an expectation against a Gamma(m) density.  The central quantities for a
tuning function h and order m are

* ``tau_m``: cov(h(Z), Z) / m, the slope of the affine part of h,
* ``sigma_star2``: var h(Z) - m tau^2, the variance scale of the disjoint
  statistic (equivalently var of the linearly corrected phi(Z)),
* ``sigma2``: var h(Z) + 2 sum_{j=1}^{m-1} cov(h(Z_0), h(Z_j)) - m^2 tau^2,
  the variance scale of the overlapping statistic,
* ``mu_m``: the correlation between phi(Z) and the centered quadratic
  (Z - m)^2 - 2(Z - m), whose variance is exactly 2m(m+1).  mu^2 <= 1 with
  equality exactly for quadratic h, and mu governs both efficacies:
  overlapping e^2 = (m+1) sigma*^2 mu^2 / (2 sigma^2), disjoint
  e*^2 = (m+1) mu^2 / (2m).

Each MomentSet records which route produced it (closed_form, quadrature, mc).
Closed forms exist for greenwood, moran and entropy; polynomial tuning
functions (greenwood, integer-index power divergence) additionally have an
exact rational route used for very large m, where the lagged covariance sum
would otherwise need thousands of two-dimensional quadratures.

Note on the entropy closed forms: a commonly reproduced display has
sigma*^2 = m(m+1) zeta(2, m) - m, which disagrees with direct quadrature
already at m = 1 (where sigma*^2 must equal sigma^2).  The validated forms,
used here and checked against quadrature, shift the zeta argument:
sigma*^2 = m(m+1) zeta(2, m+1) - m and
sigma^2 = (m(m+1))^2/2 zeta(2, m+2) - m(m+1)(2m-1)/4.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import (
    DomainError,
    InternalConsistencyError,
    QuadratureConvergenceError,
    UnsupportedLimitError,
)
from .special_math import (
    DEFAULT_SPEC,
    QuadratureSpec,
    digamma,
    gamma_expectation,
    gamma_joint_expectation,
    hurwitz_zeta2,
)
from .tuning import TuningFunction, scale_argument

_MU_TOL = 1e-12
_CRESSIE_TOL = 1e-9


@dataclass(frozen=True)
class MomentSet:
    """All (h, m) moment quantities with a provenance tag."""

    m: int
    h_name: str
    mean_h: float
    tau: float
    sigma2: float
    sigma_star2: float
    mu: float
    source: str

    def __post_init__(self):
        if self.sigma2 < 0 or self.sigma_star2 < 0:
            raise InternalConsistencyError(
                f"negative variance in MomentSet({self.h_name}, m={self.m})")
        if self.mu * self.mu > 1.0 + _MU_TOL:
            raise InternalConsistencyError(
                f"mu^2 = {self.mu ** 2} > 1 for {self.h_name}, m={self.m}")
        lhs = self.m * self.sigma_star2
        if lhs < self.sigma2 * (1.0 - _CRESSIE_TOL) - _CRESSIE_TOL:
            raise InternalConsistencyError(
                f"m sigma*^2 = {lhs} < sigma^2 = {self.sigma2} "
                f"for {self.h_name}, m={self.m}")

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "h": self.h_name,
            "mean_h": self.mean_h,
            "tau": self.tau,
            "sigma2": self.sigma2,
            "sigma_star2": self.sigma_star2,
            "mu": self.mu,
            "source": self.source,
        }


_cache: dict = {}
_cache_lock = threading.Lock()


def clear_moment_cache():
    with _cache_lock:
        _cache.clear()


# ---------------------------------------------------------------------------
# Exact rational route for polynomial tuning functions
# ---------------------------------------------------------------------------

def _rising(s: int, p: int) -> int:
    out = 1
    for i in range(p):
        out *= s + i
    return out


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if not ai:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def _poly_expect(c, m: int) -> int:
    return sum(ck * _rising(m, k) for k, ck in enumerate(c) if ck)


def _poly_joint(c, m: int, j: int) -> int:
    from math import comb

    deg = len(c) - 1
    tot = 0
    for k in range(deg + 1):
        if not c[k]:
            continue
        for l in range(deg + 1):
            if not c[l]:
                continue
            s = 0
            for i in range(k + 1):
                ck_i = comb(k, i) * _rising(j, k - i)
                for t in range(l + 1):
                    s += ck_i * comb(l, t) * _rising(m - j, i + t) * _rising(j, l - t)
            tot += c[k] * c[l] * s
    return tot


def _poly_moment_set(h: TuningFunction, m: int) -> MomentSet:
    """Exact rational moments for polynomial h (no quadrature error at all)."""
    den = 1
    for p in h.poly:
        den = den * p.denominator // math.gcd(den, p.denominator)
    ic = [int(p * den) for p in h.poly]  # den * h, integer coefficients

    e1 = _poly_expect(ic, m)
    e2 = _poly_expect(_poly_mul(ic, ic), m)
    ez = _poly_expect(_poly_mul(ic, [0, 1]), m)
    var = e2 - e1 * e1
    tau = Fraction(ez - e1 * m, m)
    star = var - m * tau * tau
    lag = 0
    for j in range(1, m):
        lag += _poly_joint(ic, m, j) - e1 * e1
    sig = var + 2 * lag - m * m * tau * tau
    # cov(phi, centered quadratic) = cov(h, (Z-m)^2) - 2 m tau
    covq = _poly_expect(_poly_mul(ic, [m * m, -2 * m, 1]), m) - e1 * m
    num = covq - 2 * m * tau
    mu2 = Fraction(num * num, 2 * m * (m + 1)) / star if star else Fraction(0)
    mu = math.sqrt(float(mu2))
    if num < 0:
        mu = -mu
    return MomentSet(
        m=m, h_name=h.name,
        mean_h=float(Fraction(e1, den)),
        tau=float(tau / den),
        sigma2=float(Fraction(sig, den * den)),
        sigma_star2=float(Fraction(star, den * den)),
        mu=mu, source="closed_form",
    )


# ---------------------------------------------------------------------------
# Closed forms for the named families
# ---------------------------------------------------------------------------

def _closed_moment_set(family: str, m: int, name: str) -> MomentSet:
    if family == "greenwood":
        star = 2.0 * m * (m + 1)
        return MomentSet(m=m, h_name=name, mean_h=float(m * (m + 1)),
                         tau=2.0 * (m + 1), sigma2=2.0 * m * (m + 1) * (2 * m + 1) / 3.0,
                         sigma_star2=star, mu=1.0, source="closed_form")
    if family == "moran":
        z = hurwitz_zeta2(m)
        star = z - 1.0 / m
        # at m = 1 the lag sum is empty and sigma^2 = sigma*^2 exactly
        sig = star if m == 1 else \
            (2.0 * m * m - 2.0 * m + 1.0) * z - 2.0 * m + 1.0
        mu = 1.0 / math.sqrt(star * 2.0 * m * (m + 1))
        return MomentSet(m=m, h_name=name, mean_h=-digamma(m), tau=-1.0 / m,
                         sigma2=sig, sigma_star2=star, mu=mu, source="closed_form")
    if family == "entropy":
        star = m * (m + 1) * hurwitz_zeta2(m + 1) - m
        sig = star if m == 1 else \
            (m * (m + 1)) ** 2 / 2.0 * hurwitz_zeta2(m + 2) \
            - m * (m + 1) * (2.0 * m - 1.0) / 4.0
        mu = m / math.sqrt(star * 2.0 * m * (m + 1))
        return MomentSet(m=m, h_name=name, mean_h=m * digamma(m + 1),
                         tau=digamma(m + 1) + 1.0, sigma2=sig, sigma_star2=star,
                         mu=mu, source="closed_form")
    raise DomainError(f"no closed-form moments for family {family!r}")


# ---------------------------------------------------------------------------
# Generic quadrature route
# ---------------------------------------------------------------------------

def _expect(h: TuningFunction, f, m: int, spec) -> float:
    return gamma_expectation(
        f, m, spec,
        log_singular_at_zero=h.log_singular_at_zero, kink=h.kink,
    ).value


def _quadrature_moment_set(h: TuningFunction, m: int,
                           spec: QuadratureSpec) -> MomentSet:
    hv = h.eval_fn
    e1 = _expect(h, hv, m, spec)
    e2 = _expect(h, lambda u: hv(u) ** 2, m, spec)
    ez = _expect(h, lambda u: hv(u) * u, m, spec)
    mq = _expect(h, lambda u: hv(u) * (u - m) ** 2, m, spec)
    var = e2 - e1 * e1
    tau = (ez - e1 * m) / m
    star = var - m * tau * tau
    if star < 0:
        if star < -1e-9 * max(1.0, var):
            raise InternalConsistencyError(
                f"sigma*^2 = {star} < 0 beyond roundoff for {h.name}, m={m}")
        warnings.warn(f"clipping tiny negative sigma*^2 = {star} to 0 "
                      f"({h.name}, m={m})")
        star = 0.0
    lag = 0.0
    for j in range(1, m):
        try:
            joint = gamma_joint_expectation(
                hv, hv, m, j, spec,
                log_singular_at_zero=h.log_singular_at_zero,
                inner_mean_f=h.inner_mean, inner_mean_g=h.inner_mean,
                outer_kink=h.kink,
            ).value
        except QuadratureConvergenceError as exc:
            raise QuadratureConvergenceError(
                f"lag-{j} covariance failed for {h.name}, m={m}: {exc}",
                last_estimates=exc.last_estimates) from exc
        lag += joint - e1 * e1
    sig = var + 2.0 * lag - m * m * tau * tau if m > 1 else star
    if sig < 0:
        if sig < -1e-9 * max(1.0, var):
            raise InternalConsistencyError(
                f"sigma^2 = {sig} < 0 beyond roundoff for {h.name}, m={m}")
        sig = 0.0
    covq = mq - e1 * m - 2.0 * m * tau  # cov(phi, centered quadratic)
    if star == 0.0:
        raise DomainError(f"mu undefined: sigma*^2 = 0 for {h.name}, m={m} "
                          f"(affine h?)")
    mu = covq / math.sqrt(star * 2.0 * m * (m + 1))
    if mu * mu > 1.0:
        mu = math.copysign(min(abs(mu), math.sqrt(1.0 + _MU_TOL / 2)), mu)
    return MomentSet(m=m, h_name=h.name, mean_h=e1, tau=tau, sigma2=sig,
                     sigma_star2=star, mu=mu, source="quadrature")


# ---------------------------------------------------------------------------
# Dispatcher
# ---------------------------------------------------------------------------

_CLOSED_FAMILIES = ("greenwood", "moran", "entropy")
#: entropy sigma^2 closed form is accepted only after matching quadrature on
#: this ladder (memoized); beyond it the lag sum would be prohibitive anyway.
_VALIDATE_M_CAP = 20
_entropy_validated = {"ok": None}


def _validate_entropy_closed(spec: QuadratureSpec):
    if _entropy_validated["ok"] is not None:
        return _entropy_validated["ok"]
    from .tuning import builtin

    h = builtin("entropy")
    worst = 0.0
    for m in (1, 2, 3, 5, 10, _VALIDATE_M_CAP):
        closed = _closed_moment_set("entropy", m, h.name)
        quad = _quadrature_moment_set(h, m, spec)
        for a, b in ((closed.sigma2, quad.sigma2),
                     (closed.sigma_star2, quad.sigma_star2)):
            worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
    ok = worst <= 1e-6
    _entropy_validated["ok"] = ok
    if not ok:
        warnings.warn(
            f"entropy closed forms disagree with quadrature "
            f"(worst rel dev {worst:.2e}); falling back to quadrature")
    return ok


def moments(h: TuningFunction, m: int, spec: QuadratureSpec | None = None,
            source: str = "auto") -> MomentSet:
    """MomentSet for (h, m), memoized.

    ``source`` forces a route: "closed_form", "quadrature", or "auto"
    (closed form when the family has one, exact rational algebra for
    polynomial h, quadrature otherwise).
    """
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    m = int(m)
    spec = spec or DEFAULT_SPEC
    key = (h.cache_key, m, source, spec.abs_tol)
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None:
        return hit
    if source == "quadrature":
        ms = _quadrature_moment_set(h, m, spec)
    elif source == "closed_form":
        ms = closed_form_moments(h.family, m, spec)
    else:
        if h.family in _CLOSED_FAMILIES and not h.derived:
            ms = closed_form_moments(h.family, m, spec)
        elif h.poly is not None:
            ms = _poly_moment_set(h, m)
        else:
            ms = _quadrature_moment_set(h, m, spec)
        if ms.h_name != h.name:  # family closed form, reported under this h
            ms = MomentSet(m=ms.m, h_name=h.name, mean_h=ms.mean_h, tau=ms.tau,
                           sigma2=ms.sigma2, sigma_star2=ms.sigma_star2,
                           mu=ms.mu, source=ms.source)
    with _cache_lock:
        _cache[key] = ms
    return ms


def closed_form_moments(family: str, m: int,
                        spec: QuadratureSpec | None = None) -> MomentSet:
    """Closed-form MomentSet for greenwood | moran | entropy.

    The entropy variance forms are validated against quadrature (once, on a
    fixed m-ladder); if that validation ever failed the quadrature values
    would be returned instead, tagged source="quadrature", with a warning.
    """
    spec = spec or DEFAULT_SPEC
    if family not in _CLOSED_FAMILIES:
        raise DomainError(f"no closed forms for family {family!r}")
    if family == "entropy" and not _validate_entropy_closed(spec):
        from .tuning import builtin

        return _quadrature_moment_set(builtin("entropy"), m, spec)
    return _closed_moment_set(family, m, family)


# ---------------------------------------------------------------------------
# Individual moment operations
# ---------------------------------------------------------------------------

def tau_m(h: TuningFunction, m: int, spec: QuadratureSpec | None = None) -> float:
    """cov(h(Z), Z) / m for Z ~ Gamma(m)."""
    return moments(h, m, spec).tau


def sigma_star2(h: TuningFunction, m: int,
                spec: QuadratureSpec | None = None) -> float:
    """var h(Z) - m tau^2: the disjoint-statistic variance scale."""
    return moments(h, m, spec).sigma_star2


def sigma2_overlapping(h: TuningFunction, m: int,
                       spec: QuadratureSpec | None = None) -> float:
    """var h + 2 sum_j cov(h(Z_0), h(Z_j)) - m^2 tau^2 (empty sum at m=1)."""
    return moments(h, m, spec).sigma2


def mu_m(h: TuningFunction, m: int, spec: QuadratureSpec | None = None) -> float:
    """Correlation of the linearly corrected h with the centered quadratic."""
    return moments(h, m, spec).mu


def null_mean(h: TuningFunction, m: int,
              spec: QuadratureSpec | None = None) -> float:
    """Per-term null mean E h(Z)."""
    return moments(h, m, spec).mean_h


def shifted_mean(h: TuningFunction, m: int, n: int, l2norm2: float,
                 spec: QuadratureSpec | None = None) -> float:
    """Per-term mean under the contamination alternative:
    E h + sigma* sqrt(m+1) mu ||l||_2^2 / sqrt(2n)."""
    if not n > m:
        raise DomainError(f"need n > m, got n={n}, m={m}")
    ms = moments(h, m, spec)
    return ms.mean_h + math.sqrt(ms.sigma_star2) * math.sqrt(m + 1.0) \
        * ms.mu * l2norm2 / math.sqrt(2.0 * n)


# ---------------------------------------------------------------------------
# Efficacy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EfficacyResult:
    e2: float
    mode: str
    m: int
    h_name: str
    mu2: float
    sigma2: float
    sigma_star2: float
    source: str

    def to_json_dict(self) -> dict:
        return {
            "h": self.h_name, "m": self.m, "mode": self.mode, "e2": self.e2,
            "mu2": self.mu2, "sigma2": self.sigma2,
            "sigma_star2": self.sigma_star2, "source": self.source,
        }


def efficacy(h: TuningFunction, m: int, mode: str,
             spec: QuadratureSpec | None = None) -> EfficacyResult:
    """Squared efficacy of the (h, m) test.

    overlapping: (m+1) sigma*^2 mu^2 / (2 sigma^2);
    disjoint:    (m+1) mu^2 / (2m).

    An equivalent covariance form, cov^2(h(Z), (Z-m-1)^2) / (4 m sigma^2)
    (resp. / (4 m^2 sigma*^2)), is evaluated through an independent single
    quadrature and must agree to 1e-8 relative; disagreement raises an
    internal-consistency error rather than returning a silently wrong value.
    """
    spec = spec or DEFAULT_SPEC
    if mode not in ("overlapping", "disjoint"):
        raise DomainError(f"mode must be overlapping|disjoint, got {mode!r}")
    ms = moments(h, m, spec)
    if ms.sigma2 <= 0:
        raise DomainError(f"sigma^2 = 0 for {h.name}, m={m}")
    mu2 = ms.mu * ms.mu
    if mode == "overlapping":
        e2 = (m + 1.0) * ms.sigma_star2 * mu2 / (2.0 * ms.sigma2)
    else:
        e2 = (m + 1.0) * mu2 / (2.0 * m)
    # independent covariance form: cov(h, (Z-m-1)^2) with E(Z-m-1)^2 = m+1
    covq = _expect(h, lambda u: h.eval_fn(u) * (u - m - 1.0) ** 2, m, spec) \
        - ms.mean_h * (m + 1.0)
    if mode == "overlapping":
        e2_cov = covq * covq / (4.0 * m * ms.sigma2)
    else:
        e2_cov = covq * covq / (4.0 * m * m * ms.sigma_star2)
    if abs(e2_cov - e2) > 1e-8 * max(1.0, abs(e2)):
        raise InternalConsistencyError(
            f"efficacy routes disagree for {h.name}, m={m}, {mode}: "
            f"{e2} (mu route) vs {e2_cov} (covariance route)")
    return EfficacyResult(e2=e2, mode=mode, m=m, h_name=h.name, mu2=mu2,
                          sigma2=ms.sigma2, sigma_star2=ms.sigma_star2,
                          source=ms.source)


# ---------------------------------------------------------------------------
# Critical points and power
# ---------------------------------------------------------------------------

def upper_quantile(alpha: float) -> float:
    """u_alpha = Phi^{-1}(1 - alpha)."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0, 1), got {alpha}")
    return float(ndtri(1.0 - alpha))


def normal_cdf(x: float) -> float:
    return float(ndtr(x))


def effective_tuning(h: TuningFunction, m: int, scaling: str) -> TuningFunction:
    """The tuning function whose by-n theory matches the requested scaling.

    Normalized scaling sums h((n/m) D) = h~(n D) with h~(x) = h(x/m), so all
    moment quantities are those of h~."""
    if scaling == "by_n":
        return h
    return scale_argument(h, Fraction(1, int(m)))


def standardization(h: TuningFunction, m: int, n: int, mode: str,
                    spec: QuadratureSpec | None = None):
    """(center, scale, count) such that (V - center)/scale is asymptotically
    standard normal under the null."""
    ms = moments(h, m, spec)
    if mode == "overlapping":
        return n * ms.mean_h, math.sqrt(ms.sigma2 * n), n
    if n % m:
        raise DomainError(f"disjoint mode needs m | n (m={m}, n={n})")
    count = n // m
    return count * ms.mean_h, math.sqrt(ms.sigma_star2 * count), count


def critical_point(h: TuningFunction, m: int, n: int, alpha: float, mode: str,
                   spec: QuadratureSpec | None = None) -> float:
    """Size-alpha critical value of the one-sided (large-values) test:
    u_alpha * scale + center under the null standardization."""
    if not 1 <= m < n:
        raise DomainError(f"need 1 <= m < n, got m={m}, n={n}")
    center, scale, _ = standardization(h, m, n, mode, spec)
    return upper_quantile(alpha) * scale + center


def predicted_power(e2: float, l2norm2: float, alpha: float) -> float:
    """Asymptotic power Phi(e ||l||_2^2 - u_alpha) of a size-alpha test with
    squared efficacy e2 against the contamination path of squared norm
    l2norm2."""
    if e2 < 0:
        raise DomainError(f"e2 must be >= 0, got {e2}")
    return normal_cdf(math.sqrt(e2) * l2norm2 - upper_quantile(alpha))


# ---------------------------------------------------------------------------
# Pitman asymptotic relative efficiency
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TestSpec:
    h: TuningFunction
    m: int
    mode: str = "overlapping"


@dataclass(frozen=True)
class GrowthRegime:
    """m = c * n^p with 0 < p < 1, c > 0."""

    c: float
    p: float

    def __post_init__(self):
        if not (self.c > 0 and 0.0 < self.p < 1.0):
            raise DomainError("regime needs c > 0 and p in (0, 1)")


@dataclass(frozen=True)
class AreQuery:
    spec1: TestSpec
    spec2: TestSpec
    regime1: GrowthRegime | None = None
    regime2: GrowthRegime | None = None


@dataclass(frozen=True)
class AreResult:
    value: float  # may be 0.0 or inf for regime queries
    kind: str  # "finite" | "regime"
    description: str

    def to_json_dict(self) -> dict:
        return {"value": self.value, "kind": self.kind,
                "description": self.description}


_PD_EQUIVALENT = ("greenwood", "moran", "entropy", "power_divergence")


def pitman_are(q: AreQuery, spec: QuadratureSpec | None = None) -> AreResult:
    """Pitman ARE of test 1 with respect to test 2: the limiting ratio of
    sample sizes test 2 needs to match test 1's power at equal size.

    With both orders finite the value is m1 e1^2 / (m2 e2^2).  With growth
    regimes m_i = c_i n^{p_i} supplied, the known limits for the
    power-divergence family apply: 0 if p1 < p2, infinity if p1 > p2, and for
    p1 = p2 the ratio c1/c2 times a mode factor (3/2 when test 1 overlaps and
    test 2 is disjoint, 2/3 for the reverse, 1 for equal modes)."""
    if (q.regime1 is None) != (q.regime2 is None):
        raise DomainError("supply growth regimes for both tests or neither")
    if q.regime1 is None:
        e1 = efficacy(q.spec1.h, q.spec1.m, q.spec1.mode, spec)
        e2 = efficacy(q.spec2.h, q.spec2.m, q.spec2.mode, spec)
        if e2.e2 == 0:
            raise DomainError("second test has zero efficacy")
        val = (q.spec1.m * e1.e2) / (q.spec2.m * e2.e2)
        return AreResult(val, "finite",
                         f"m1 e1^2 / (m2 e2^2) at m1={q.spec1.m}, m2={q.spec2.m}")
    for s in (q.spec1, q.spec2):
        if s.h.family not in _PD_EQUIVALENT:
            raise UnsupportedLimitError(
                f"growth-regime limits are only known for the power-divergence "
                f"family; {s.h.name} is not a member")
    r1, r2 = q.regime1, q.regime2
    if r1.p < r2.p:
        return AreResult(0.0, "regime", f"p1={r1.p} < p2={r2.p}")
    if r1.p > r2.p:
        return AreResult(math.inf, "regime", f"p1={r1.p} > p2={r2.p}")
    factor = 1.0
    if q.spec1.mode == "overlapping" and q.spec2.mode == "disjoint":
        factor = 1.5
    elif q.spec1.mode == "disjoint" and q.spec2.mode == "overlapping":
        factor = 2.0 / 3.0
    return AreResult(factor * r1.c / r2.c, "regime",
                     f"p1=p2={r1.p}: (c1/c2) * {factor:g}")


# ---------------------------------------------------------------------------
# CLT condition diagnostic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CltConditionReport:
    """Both normalizations of the Lyapunov-type CLT condition ratio.

    Two inconsistent displays of this condition circulate: one divides by
    sigma^(r/2), the other (dimensionally consistent, from the general
    m-dependent-sum CLT) by sigma^r.  Neither is trusted as *the* condition;
    both are reported and only relative trends in n or m are meaningful.
    """

    ratio_sigma_half_power: float
    ratio_sigma_full_power: float
    e_abs_r: float
    e_abs_r_se: float
    r: float
    mode: str


def clt_condition_ratio(h: TuningFunction, m: int, n: int, r: float,
                        mode: str = "overlapping", reps: int = 200_000,
                        seed: int = 20240 * 31,
                        spec: QuadratureSpec | None = None) -> CltConditionReport:
    """Monte Carlo diagnostic of the CLT moment condition.

    Overlapping mode estimates E|g|^r with g(Z) = h(Z) - Eh - (Y_0 - 1) m tau
    over joint draws of (Y_0, Z = Y_0 + Gamma(m-1)) and reports
    m^(r-1) E|g|^r / (sigma^q n^((r-2)/2)) for q in {r/2, r}.  Disjoint mode
    uses phi(Z) = h(Z) - Eh - (Z - m) tau, sigma* and N = n/m."""
    if not 2.0 < r <= 6.0:
        raise DomainError(f"r must be in (2, 6], got {r}")
    if mode not in ("overlapping", "disjoint"):
        raise DomainError(f"bad mode {mode!r}")
    ms = moments(h, m, spec)
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    if mode == "overlapping":
        y0 = rng.standard_exponential(reps)
        z = y0 + (rng.standard_gamma(m - 1, size=reps) if m > 1 else 0.0)
        g = h.eval_fn(z) - ms.mean_h - (y0 - 1.0) * m * ms.tau
        sig = math.sqrt(ms.sigma2)
        count = n
        lead = float(m) ** (r - 1.0)
    else:
        if n % m:
            raise DomainError(f"disjoint mode needs m | n (m={m}, n={n})")
        z = rng.standard_gamma(m, size=reps)
        g = h.eval_fn(z) - ms.mean_h - (z - m) * ms.tau
        sig = math.sqrt(ms.sigma_star2)
        count = n // m
        lead = 1.0
    a = np.abs(g) ** r
    e_abs = float(a.mean())
    se = float(a.std(ddof=1) / math.sqrt(reps))
    denom_n = float(count) ** ((r - 2.0) / 2.0)
    return CltConditionReport(
        ratio_sigma_half_power=lead * e_abs / (sig ** (r / 2.0) * denom_n),
        ratio_sigma_full_power=lead * e_abs / (sig ** r * denom_n),
        e_abs_r=e_abs, e_abs_r_se=se, r=r, mode=mode,
    )
