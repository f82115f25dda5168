"""Contamination alternatives 1 + delta * l(x) on [0, 1] and exact samplers.

The contamination rate is tied to the spacings order, delta = (n m)^(-1/4);
that is the rate at which these tests have non-trivial local power, and every
power formula assumes it.  ``delta_override`` exists as an expert escape
hatch (fixed-delta alternatives are needed e.g. for finite-n sample-size
matching) and is off-theory: none of the asymptotic power predictions apply
to an overridden delta as-is.

Null samples are sorted uniforms generated without sorting: with n iid
standard exponentials Y_0..Y_(n-1) and S their sum, the partial sums
(Y_0 + ... + Y_(k-1)) / S for k = 1..n-1 are exactly the order statistics of
n-1 uniforms.  Alternative samples push those through the inverse CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .errors import DomainError, PositivityError
from .spacings import SortedSample

_GRID = 8192  # panels for numeric paths; panel-wise 8-pt Gauss is ~1e-15 exact


@dataclass(frozen=True)
class AlternativeModel:
    """A contamination path l with its norms, CDF pieces, and scale delta."""

    kind: str
    params: tuple
    n: int
    m: int
    delta: float
    path: object                 # l(x), vectorized
    path_integral: object        # L(x) = int_0^x l, vectorized, L(0)=L(1)=0
    path_derivative: object | None
    l2norm2: float
    l3norm3: float
    sup_abs_l: float
    off_theory_delta: bool = False

    def density(self, x):
        return 1.0 + self.delta * self.path(np.asarray(x, dtype=float))


def _panel_nodes():
    t, w = roots_legendre(8)
    edges = np.linspace(0.0, 1.0, _GRID + 1)
    half = 0.5 / _GRID
    mids = edges[:-1] + half
    x = (mids[:, None] + half * t[None, :]).ravel()
    wts = (np.broadcast_to(w[None, :] * half, (_GRID, 8))).ravel()
    return x, wts, edges


def _numeric_integral(l):
    """Cumulative integral of l as a fast callable, by per-panel Gauss."""
    x, w, edges = _panel_nodes()
    vals = (l(x) * w).reshape(_GRID, 8).sum(axis=1)
    cum = np.concatenate([[0.0], np.cumsum(vals)])
    t8, w8 = roots_legendre(8)

    def L(q):
        q = np.asarray(q, dtype=float)
        scalar = q.ndim == 0
        q = np.atleast_1d(q)
        idx = np.clip((q * _GRID).astype(int), 0, _GRID - 1)
        lo = edges[idx]
        halfw = 0.5 * (q - lo)
        pts = lo[:, None] + halfw[:, None] * (t8[None, :] + 1.0)
        part = (l(pts.ravel()).reshape(pts.shape) * w8[None, :]).sum(axis=1) * halfw
        out = cum[idx] + part
        return out[0] if scalar else out

    return L


def _norms(l):
    x, w, _ = _panel_nodes()
    v = l(x)
    return float((w * v * v).sum()), float((w * v ** 3).sum()), float(np.abs(v).max())


def make_alternative(kind: str, params, n: int, m: int,
                     delta_override: float | None = None) -> AlternativeModel:
    """Build a contamination model with delta = (n m)^(-1/4).

    Kinds: ("cosine", k, theta) with l(x) = theta cos(2 pi k x);
    ("bump", center, width, theta), a smooth compactly supported bump with
    its mean removed; ("table", xs, ys), a cubic-spline path through given
    points with endpoint mean correction.  The zero-mean invariant and the
    density positivity delta * sup|l| < 1 are verified at construction.
    """
    if n < 2 or m < 1:
        raise DomainError(f"need n >= 2 and m >= 1, got n={n}, m={m}")
    delta = (n * m) ** -0.25 if delta_override is None else float(delta_override)

    if kind == "cosine":
        k, theta = int(params[0]), float(params[1])
        if k < 1:
            raise DomainError("cosine frequency k must be >= 1")
        two_pi_k = 2.0 * math.pi * k

        def l(x):
            return theta * np.cos(two_pi_k * np.asarray(x, dtype=float))

        def L(x):
            return theta * np.sin(two_pi_k * np.asarray(x, dtype=float)) / two_pi_k

        def lp(x):
            return -theta * two_pi_k * np.sin(two_pi_k * np.asarray(x, dtype=float))

        l2, l3, sup = _norms(l)
        model = AlternativeModel(kind="cosine", params=(k, theta), n=n, m=m,
                                 delta=delta, path=l, path_integral=L,
                                 path_derivative=lp, l2norm2=l2, l3norm3=l3,
                                 sup_abs_l=sup,
                                 off_theory_delta=delta_override is not None)
    elif kind == "bump":
        center, width, theta = (float(p) for p in params)
        if not (0.0 < center < 1.0 and width > 0):
            raise DomainError("bump needs 0 < center < 1 and width > 0")

        def base(x):
            t = (np.asarray(x, dtype=float) - center) / width
            out = np.zeros_like(t)
            inside = np.abs(t) < 1.0
            ti = t[inside]
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
            return out

        x, w, _ = _panel_nodes()
        mean = float((w * base(x)).sum())

        def l(x):
            return theta * (base(x) - mean)

        def lp(x):
            t = (np.asarray(x, dtype=float) - center) / width
            out = np.zeros_like(t)
            inside = np.abs(t) < 1.0
            ti = t[inside]
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti)) \
                * (-2.0 * ti / (1.0 - ti * ti) ** 2) / width
            return theta * out

        L = _numeric_integral(l)
        l2, l3, sup = _norms(l)
        model = AlternativeModel(kind="bump", params=(center, width, theta),
                                 n=n, m=m, delta=delta, path=l,
                                 path_integral=L, path_derivative=lp,
                                 l2norm2=l2, l3norm3=l3, sup_abs_l=sup,
                                 off_theory_delta=delta_override is not None)
    elif kind == "table":
        from scipy.interpolate import CubicSpline

        xs = np.asarray(params[0], dtype=float)
        ys = np.asarray(params[1], dtype=float)
        if xs.size < 4 or xs[0] != 0.0 or xs[-1] != 1.0:
            raise DomainError("table path needs >= 4 points spanning [0, 1]")
        s = CubicSpline(xs, ys)
        mean = float(s.integrate(0.0, 1.0))
        anti = s.antiderivative()
        a0 = float(anti(0.0))

        def l(x):
            return s(np.asarray(x, dtype=float)) - mean

        def L(x):
            x = np.asarray(x, dtype=float)
            return anti(x) - a0 - mean * x

        def lp(x):
            return s(np.asarray(x, dtype=float), 1)

        l2, l3, sup = _norms(l)
        model = AlternativeModel(kind="table", params=(tuple(xs), tuple(ys)),
                                 n=n, m=m, delta=delta, path=l,
                                 path_integral=L, path_derivative=lp,
                                 l2norm2=l2, l3norm3=l3, sup_abs_l=sup,
                                 off_theory_delta=delta_override is not None)
    else:
        raise DomainError(f"unknown alternative kind {kind!r}")

    if abs(float(model.path_integral(1.0))) > 1e-10:
        raise DomainError(f"path does not integrate to zero: "
                          f"L(1) = {float(model.path_integral(1.0))}")
    if model.delta * model.sup_abs_l >= 1.0:
        raise PositivityError(
            f"density not positive: delta * sup|l| = "
            f"{model.delta * model.sup_abs_l:.6g} >= 1")
    return model


def cdf(model: AlternativeModel, x):
    """F(x) = x + delta * int_0^x l; strictly increasing by positivity.

    F(0) = 0 and F(1) = 1 exactly (the path integrates to zero), enforced
    against quadrature roundoff in the numeric-path kinds."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise DomainError("cdf argument outside [0, 1]")
    out = x + model.delta * model.path_integral(x)
    return np.where(x == 0.0, 0.0, np.where(x == 1.0, 1.0, out))


def inverse_cdf(model: AlternativeModel, u):
    """F^{-1}(u) to |F(y) - u| <= 1e-12, by bisection-safeguarded Newton
    (F' = 1 + delta*l is known and bounded away from 0)."""
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u).copy()
    if np.any((u < 0) | (u > 1)):
        raise DomainError("inverse_cdf argument outside [0, 1]")
    lo = np.zeros_like(u)
    hi = np.ones_like(u)
    y = u.copy()
    for _ in range(90):
        f = y + model.delta * model.path_integral(y) - u
        done = np.abs(f) <= 1e-13
        if done.all():
            break
        hi = np.where(f > 0, y, hi)
        lo = np.where(f <= 0, y, lo)
        step = f / (1.0 + model.delta * model.path(y))
        cand = y - step
        bad = (cand <= lo) | (cand >= hi)
        y = np.where(bad & ~done, 0.5 * (lo + hi), np.where(done, y, cand))
    return y[0] if scalar else y


def sample_values(model: AlternativeModel | None, n: int, rng) -> np.ndarray:
    """n-1 sorted observations as a raw array (hot path for simulations)."""
    y = rng.standard_exponential(n)
    u = np.cumsum(y[:-1]) / y.sum()
    if model is None or model.delta == 0.0 or model.sup_abs_l == 0.0:
        return u
    return inverse_cdf(model, u)


def sample_sorted(model: AlternativeModel | None, n: int, seed: int,
                  rng=None) -> SortedSample:
    """Sorted sample of size n-1 under the null (model=None) or the model.

    All randomness derives from ``seed`` (or an explicitly passed generator).
    """
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    if rng is None:
        rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    vals = sample_values(model, n, rng)
    return SortedSample(values=vals, n=n, has_ties=False)


def parse_path(text: str, n: int, m: int,
               delta_override: float | None = None) -> AlternativeModel | None:
    """CLI path syntax: cos:<k>:<theta> | bump:<center>:<width>:<theta> |
    table:<file> | null."""
    if text in ("null", "none"):
        return None
    parts = text.split(":")
    if parts[0] == "cos" and len(parts) == 3:
        return make_alternative("cosine", (int(parts[1]), float(parts[2])), n, m,
                                delta_override=delta_override)
    if parts[0] == "bump" and len(parts) == 4:
        return make_alternative("bump", tuple(float(p) for p in parts[1:]), n, m,
                                delta_override=delta_override)
    if parts[0] == "table" and len(parts) == 2:
        rows = np.loadtxt(parts[1], delimiter=None)
        return make_alternative("table", (rows[:, 0], rows[:, 1]), n, m,
                                delta_override=delta_override)
    raise DomainError(f"cannot parse path spec {text!r}")
