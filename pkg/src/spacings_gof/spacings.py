"""Circular m-spacings of a sorted sample and the spacings statistics.

Conventions: sample X_1 <= ... <= X_(n-1) in [0, 1] with X_0 = 0, X_n = 1 and
the circular extension X_k = 1 + X_(k-n) for k > n.  Overlapping m-spacings
are D_k = X_(k+m) - X_k for k = 0..n-1 (n of them, total mass m); disjoint
m-spacings take every m-th start index (n/m of them, total mass 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpacingError, DomainError
from .tuning import TuningFunction


@dataclass(frozen=True)
class SortedSample:
    """n-1 sorted observations in [0, 1]; n is the sample parameter."""

    values: np.ndarray
    n: int
    has_ties: bool = False


@dataclass(frozen=True)
class SpacingsPlan:
    """Which statistic to build: order m, overlapping/disjoint starts, and
    whether spacings are scaled by n or by n/m (the latter requires m | n,
    as does disjoint mode)."""

    m: int
    mode: str = "overlapping"
    scaling: str = "by_n"

    def __post_init__(self):
        if self.mode not in ("overlapping", "disjoint"):
            raise DomainError(f"mode must be overlapping|disjoint, got {self.mode!r}")
        if self.scaling not in ("by_n", "normalized"):
            raise DomainError(f"scaling must be by_n|normalized, got {self.scaling!r}")
        if self.m < 1:
            raise DomainError("m must be >= 1")

    def validate_for(self, n: int):
        if not 1 <= self.m < n:
            raise DomainError(f"need 1 <= m < n, got m={self.m}, n={n}")
        if (self.mode == "disjoint" or self.scaling == "normalized") and n % self.m:
            raise DomainError(
                f"m={self.m} does not divide n={n}, required for "
                f"{'disjoint mode' if self.mode == 'disjoint' else 'normalized scaling'}")

    def scale_factor(self, n: int) -> float:
        return float(n) if self.scaling == "by_n" else n / self.m


@dataclass(frozen=True)
class SpacingsVector:
    values: np.ndarray
    mode: str
    m: int
    n: int


def validate_sample(raw) -> SortedSample:
    """Sort (if needed), range-check, and wrap a raw sequence of reals.

    The sample parameter is n = count + 1.  Ties are allowed but flagged:
    they are a probability-zero event for continuous data and make log-type
    statistics degenerate.
    """
    x = np.asarray(list(raw), dtype=float)
    if x.size < 1:
        raise DomainError("need at least 1 observation")
    bad = np.where((x < 0.0) | (x > 1.0) | ~np.isfinite(x))[0]
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"observation {i + 1} = {x[i]!r} outside [0, 1]")
    if np.any(np.diff(x) < 0):
        x = np.sort(x)
    ties = bool(np.any(np.diff(x) == 0.0))
    return SortedSample(values=x, n=x.size + 1, has_ties=ties)


def read_sample_file(path) -> SortedSample:
    """Read one observation per line; '# n=<int>' header asserts intended n."""
    expected_n = None
    vals = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                body = s[1:].strip()
                if body.startswith("n="):
                    expected_n = int(body[2:])
                continue
            try:
                vals.append(float(s))
            except ValueError:
                raise DomainError(f"{path}: line {lineno}: not a number: {s!r}")
    sample = validate_sample(vals)
    if expected_n is not None and sample.n != expected_n:
        raise DomainError(
            f"{path}: header asserts n={expected_n} but file has "
            f"{len(vals)} observations (n={sample.n})")
    return sample


def _extended(values: np.ndarray, m: int) -> np.ndarray:
    # X_0..X_n plus the circular continuation X_(n+i) = 1 + X_i, i < m
    n = values.size + 1
    base = np.empty(n + m, dtype=float)
    base[0] = 0.0
    base[1:n] = values
    base[n] = 1.0
    if m > 1:
        base[n + 1:] = 1.0 + values[: m - 1]
    return base


def overlapping_spacings(s: SortedSample, m: int) -> SpacingsVector:
    """All n circular m-spacings X_(k+m) - X_k, k = 0..n-1.  Sums to m."""
    if not 1 <= m < s.n:
        raise DomainError(f"need 1 <= m < n, got m={m}, n={s.n}")
    ext = _extended(s.values, m)
    d = ext[m: m + s.n] - ext[: s.n]
    return SpacingsVector(values=d, mode="overlapping", m=m, n=s.n)


def disjoint_spacings(s: SortedSample, m: int) -> SpacingsVector:
    """The n/m disjoint m-spacings.  Requires m | n; sums to 1.

    m = n is allowed here (one spacing covering the whole interval); plans
    that build statistics still require m < n.
    """
    if not 1 <= m <= s.n:
        raise DomainError(f"need 1 <= m <= n, got m={m}, n={s.n}")
    if s.n % m:
        raise DomainError(f"m={m} does not divide n={s.n}")
    ext = _extended(s.values, 1)[: s.n + 1]  # X_0..X_n
    d = ext[m:: m] - ext[:-1: m]
    return SpacingsVector(values=d, mode="disjoint", m=m, n=s.n)


def spacings_for_plan(s: SortedSample, plan: SpacingsPlan) -> SpacingsVector:
    plan.validate_for(s.n)
    if plan.mode == "overlapping":
        return overlapping_spacings(s, plan.m)
    return disjoint_spacings(s, plan.m)


def statistic(s: SortedSample, plan: SpacingsPlan, h: TuningFunction) -> float:
    """Sum of h(c * D_k) over the planned spacings, c = n or n/m.

    Summation is compensated (math.fsum) so statistics stay exact for n up
    to the simulation sizes.  A zero spacing combined with an h that is
    singular (or undefined) at zero raises a degenerate-spacing error naming
    the first offending index.
    """
    vec = spacings_for_plan(s, plan)
    c = plan.scale_factor(s.n)
    d = vec.values
    if not h.defined_at_zero:
        zero = np.where(d <= 0.0)[0]
        if zero.size:
            k = int(zero[0])
            raise DegenerateSpacingError(
                f"zero spacing at index {k} with tuning function {h.name}, "
                f"which is not defined at 0 (tied observations?)", index=k)
    return math.fsum(h.eval_fn(c * d))
