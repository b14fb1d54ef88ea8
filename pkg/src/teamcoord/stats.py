"""Statistical engine: rank correlation, OLS and quadratic regression,
bootstrapped mediation, two-sample and k-sample tests, quartile grouping.

Everything is implemented directly on numpy; tail probabilities come from
the incomplete-beta routines in `special`. Ties always receive average
ranks. The bootstrap uses numpy's splittable SeedSequence/Philox streams:
resample k draws from the k-th child stream of the seed, so results are
identical no matter how the loop is scheduled.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .core import TeamCoordError
from .special import f_sf, normal_sf, student_t_two_sided


class LengthMismatchError(TeamCoordError):
    """Paired vectors differ in length."""


class DegenerateDataError(TeamCoordError):
    """Statistic undefined because the data carries no variation."""


class RankDeficiencyError(TeamCoordError):
    """Design matrix is rank deficient."""


class TooFewTeamsError(TeamCoordError):
    """Quartile grouping needs at least four teams."""


def _vector(x, name: str = "x") -> np.ndarray:
    out = np.asarray(x, dtype=float)
    if out.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    return out


def _paired(x, y) -> tuple[np.ndarray, np.ndarray]:
    xv, yv = _vector(x), _vector(y, "y")
    if xv.size != yv.size:
        raise LengthMismatchError(f"lengths differ: {xv.size} vs {yv.size}")
    return xv, yv


def rankdata(x) -> np.ndarray:
    """Ranks starting at 1; ties share the mean of their ordinal ranks."""
    xv = _vector(x)
    order = np.argsort(xv, kind="mergesort")
    ranks = np.empty(xv.size, dtype=float)
    sx = xv[order]
    i = 0
    while i < xv.size:
        j = i
        while j + 1 < xv.size and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


# ---------------------------------------------------------------------------
# Spearman correlation


@dataclass(frozen=True)
class SpearmanResult:
    rho: float
    p_value: float
    n: int


def spearman(x, y) -> SpearmanResult:
    """Spearman rho with the two-sided t-approximation p-value."""
    xv, yv = _paired(x, y)
    n = xv.size
    if n < 3:
        raise ValueError(f"need at least 3 observations, got {n}")
    rx, ry = rankdata(xv), rankdata(yv)
    dx, dy = rx - rx.mean(), ry - ry.mean()
    vx, vy = float(dx @ dx), float(dy @ dy)
    if vx == 0.0 or vy == 0.0:
        raise DegenerateDataError("rho undefined: a variable has zero rank variance")
    rho = float(dx @ dy) / math.sqrt(vx * vy)
    rho = max(-1.0, min(1.0, rho))
    if abs(rho) == 1.0:
        p = 0.0
    else:
        t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
        p = student_t_two_sided(t, n - 2)
    return SpearmanResult(rho=rho, p_value=p, n=n)


# ---------------------------------------------------------------------------
# Ordinary least squares


@dataclass(frozen=True, eq=False)
class OlsResult:
    coefficients: np.ndarray
    r_squared: float
    f_stat: float
    f_p_value: float
    coef_p_values: np.ndarray
    coef_se: np.ndarray
    residuals: np.ndarray
    n: int
    df_resid: int


def ols(y, design) -> OlsResult:
    """Least squares of y on a design matrix whose first column is the intercept.

    The F statistic tests the slope terms jointly; coefficient p-values are
    two-sided t tests on n - k residual degrees of freedom.
    """
    yv = _vector(y, "y")
    X = np.asarray(design, dtype=float)
    if X.ndim != 2:
        raise ValueError("design must be a 2-d matrix")
    n, k = X.shape
    if yv.size != n:
        raise LengthMismatchError(f"y has {yv.size} rows, design has {n}")
    if n <= k:
        raise ValueError(f"need more observations ({n}) than columns ({k})")
    if np.linalg.matrix_rank(X) < k:
        raise RankDeficiencyError("design matrix is rank deficient")

    beta, _, _, _ = np.linalg.lstsq(X, yv, rcond=None)
    resid = yv - X @ beta
    ssr = float(resid @ resid)
    centered = yv - yv.mean()
    sst = float(centered @ centered)
    r2 = 0.0 if sst == 0.0 else max(0.0, min(1.0, 1.0 - ssr / sst))

    df_resid = n - k
    p_slopes = k - 1
    if p_slopes == 0 or sst == 0.0:
        f_stat, f_p = 0.0, 1.0
    elif r2 >= 1.0:
        f_stat, f_p = math.inf, 0.0
    else:
        f_stat = (r2 / p_slopes) / ((1.0 - r2) / df_resid)
        f_p = f_sf(f_stat, p_slopes, df_resid)

    sigma2 = ssr / df_resid
    xtx_inv = np.linalg.inv(X.T @ X)
    se = np.sqrt(np.clip(np.diag(xtx_inv), 0.0, None) * sigma2)
    p_values = np.empty(k)
    for i in range(k):
        if se[i] == 0.0:
            p_values[i] = 0.0 if beta[i] != 0.0 else 1.0
        else:
            p_values[i] = student_t_two_sided(beta[i] / se[i], df_resid)
    return OlsResult(coefficients=beta, r_squared=r2, f_stat=f_stat, f_p_value=f_p,
                     coef_p_values=p_values, coef_se=se, residuals=resid, n=n, df_resid=df_resid)


def design_matrix(*columns) -> np.ndarray:
    """Stack predictor columns behind an intercept column."""
    cols = [_vector(c, f"column {i}") for i, c in enumerate(columns)]
    n = cols[0].size
    return np.column_stack([np.ones(n)] + cols)


# ---------------------------------------------------------------------------
# Quadratic regression


@dataclass(frozen=True, eq=False)
class QuadraticFit:
    c0: float
    c1: float
    c2: float
    vertex_x: float  # nan when c2 == 0
    r_squared: float
    f_stat: float
    f_p_value: float
    p_values: np.ndarray  # for (c0, c1, c2)

    @property
    def inverted_u(self) -> bool:
        return self.c2 < 0


def vertex_of(c1: float, c2: float) -> float:
    """Extremum location -c1 / (2 c2) of c0 + c1 x + c2 x^2."""
    if c2 == 0.0:
        return math.nan
    return -c1 / (2.0 * c2)


def quadratic_fit(x, y) -> QuadraticFit:
    """OLS of y on (1, x, x^2); the vertex is the fitted optimum."""
    xv, yv = _paired(x, y)
    if xv.size < 4:
        raise ValueError(f"need at least 4 observations, got {xv.size}")
    if np.unique(xv).size < 3:
        raise RankDeficiencyError("x needs at least 3 distinct values for a quadratic fit")
    res = ols(yv, np.column_stack([np.ones(xv.size), xv, xv * xv]))
    c0, c1, c2 = (float(b) for b in res.coefficients)
    return QuadraticFit(c0=c0, c1=c1, c2=c2, vertex_x=vertex_of(c1, c2),
                        r_squared=res.r_squared, f_stat=res.f_stat,
                        f_p_value=res.f_p_value, p_values=res.coef_p_values)


# ---------------------------------------------------------------------------
# Bootstrapped mediation


@dataclass(frozen=True)
class MediationResult:
    a: float
    b: float
    c_total: float
    c_prime: float
    indirect_point: float
    boot_indirect_mean: float
    ci_low: float
    ci_high: float
    pct_mediated: float | None
    resamples: int
    seed: int

    @property
    def significant(self) -> bool:
        """Mediation is claimed when the bootstrap interval excludes zero."""
        return self.ci_low > 0.0 or self.ci_high < 0.0


def pct_mediated(indirect: float, total: float) -> float | None:
    """Share of the total effect carried by the indirect path, in percent.

    Reported only when the two effects share a sign; a ratio of opposing
    effects is not a proportion.
    """
    if total == 0.0 or indirect * total < 0.0:
        return None
    return 100.0 * indirect / total


def _mediation_paths(x: np.ndarray, m: np.ndarray, y: np.ndarray):
    """Closed-form OLS paths: a (m~x), b and c' (y~x+m), c (y~x).

    Returns None when the resample is degenerate (constant x or collinear
    x, m), so the caller can redraw.
    """
    xc = x - x.mean()
    mc = m - m.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        return None
    sxm = float(xc @ mc)
    smm = float(mc @ mc)
    sxy = float(xc @ yc)
    smy = float(mc @ yc)
    det = sxx * smm - sxm * sxm
    if det == 0.0:
        return None
    a = sxm / sxx
    c_total = sxy / sxx
    c_prime = (smm * sxy - sxm * smy) / det
    b = (sxx * smy - sxm * sxy) / det
    return a, b, c_prime, c_total


def bootstrap_mediation(x, m, y, resamples: int = 5000, seed: int = 0) -> MediationResult:
    """Indirect effect a*b with a percentile bootstrap confidence interval.

    Rows are resampled with replacement as (x, m, y) triples. The 95%
    interval uses the 2.5 and 97.5 percentiles of the resampled indirect
    effects; results are bit-reproducible for a fixed seed and resample
    count.
    """
    xv, mv = _paired(x, m)
    yv = _vector(y, "y")
    if yv.size != xv.size:
        raise LengthMismatchError(f"lengths differ: {xv.size} vs {yv.size}")
    n = xv.size
    if n < 5:
        raise ValueError(f"need at least 5 observations, got {n}")
    if resamples < 1:
        raise ValueError("resamples must be positive")
    paths = _mediation_paths(xv, mv, yv)
    if paths is None:
        raise DegenerateDataError("x is constant or x and m are collinear")
    a, b, c_prime, c_total = paths

    children = np.random.SeedSequence(seed).spawn(resamples)
    boot = np.empty(resamples)
    for k, child in enumerate(children):
        rng = np.random.Generator(np.random.Philox(child))
        for _ in range(100):
            idx = rng.integers(0, n, size=n)
            sub = _mediation_paths(xv[idx], mv[idx], yv[idx])
            if sub is not None:
                boot[k] = sub[0] * sub[1]
                break
        else:
            raise DegenerateDataError(f"resample {k} stayed degenerate after 100 draws")

    ci_low, ci_high = np.percentile(boot, [2.5, 97.5])
    return MediationResult(
        a=a, b=b, c_total=c_total, c_prime=c_prime,
        indirect_point=a * b, boot_indirect_mean=float(boot.mean()),
        ci_low=float(ci_low), ci_high=float(ci_high),
        pct_mediated=pct_mediated(a * b, c_total),
        resamples=resamples, seed=seed)


# ---------------------------------------------------------------------------
# Mann-Whitney U


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float
    p_value: float
    n1: int
    n2: int


def mann_whitney_u(a, b) -> MannWhitneyResult:
    """U = min(U1, U2) with a tie- and continuity-corrected normal p-value."""
    av, bv = _vector(a, "a"), _vector(b, "b")
    n1, n2 = av.size, bv.size
    if n1 == 0 or n2 == 0:
        raise ValueError("both samples must be non-empty")
    ranks = rankdata(np.concatenate([av, bv]))
    r1 = float(ranks[:n1].sum())
    u1 = r1 - n1 * (n1 + 1) / 2.0
    u2 = n1 * n2 - u1
    u = min(u1, u2)

    total = n1 + n2
    _, counts = np.unique(np.concatenate([av, bv]), return_counts=True)
    tie_term = float((counts.astype(float) ** 3 - counts).sum())
    correction = 1.0 - tie_term / (total ** 3 - total) if total > 1 else 0.0
    sd = math.sqrt(correction * n1 * n2 * (total + 1) / 12.0)
    if sd == 0.0:
        p = 1.0  # every pooled value tied; no evidence either way
    else:
        z = max(0.0, abs(u - n1 * n2 / 2.0) - 0.5) / sd
        p = min(1.0, 2.0 * normal_sf(z))
    return MannWhitneyResult(u=u, p_value=p, n1=n1, n2=n2)


def mann_whitney_u_exact(a, b, alternative: str = "two-sided") -> MannWhitneyResult:
    """Exact Mann-Whitney p by enumerating all group assignments.

    Feasible for small groups only (at most 10 per side). `alternative`
    is "less" (a shifted low), "greater", or "two-sided".
    """
    av, bv = _vector(a, "a"), _vector(b, "b")
    n1, n2 = av.size, bv.size
    if n1 == 0 or n2 == 0:
        raise ValueError("both samples must be non-empty")
    if n1 > 10 or n2 > 10:
        raise ValueError("exact enumeration supports at most 10 per group")
    if alternative not in ("less", "greater", "two-sided"):
        raise ValueError(f"unknown alternative {alternative!r}")

    pooled = np.concatenate([av, bv])
    total = n1 + n2
    # s[i] = number of pooled values beaten by value i, counting ties as 1/2;
    # the U of a subset A is then sum(s[A]) - C(|A|, 2).
    gt = pooled[:, None] > pooled[None, :]
    eq = pooled[:, None] == pooled[None, :]
    s = gt.sum(axis=1) + 0.5 * (eq.sum(axis=1) - 1)

    u_obs = float(s[:n1].sum() - n1 * (n1 - 1) / 2.0)
    adjust = n1 * (n1 - 1) / 2.0
    n_le = n_ge = 0
    n_total = 0
    eps = 1e-9
    for combo in itertools.combinations(range(total), n1):
        u = float(sum(s[i] for i in combo) - adjust)
        n_total += 1
        if u <= u_obs + eps:
            n_le += 1
        if u >= u_obs - eps:
            n_ge += 1
    p_less = n_le / n_total
    p_greater = n_ge / n_total
    if alternative == "less":
        p = p_less
    elif alternative == "greater":
        p = p_greater
    else:
        p = min(1.0, 2.0 * min(p_less, p_greater))
    u2 = n1 * n2 - u_obs
    return MannWhitneyResult(u=min(u_obs, u2), p_value=p, n1=n1, n2=n2)


# ---------------------------------------------------------------------------
# One-way ANOVA


@dataclass(frozen=True)
class AnovaResult:
    f: float
    p_value: float
    df_between: int
    df_within: int
    infinite_f: bool = False


def one_way_anova(groups: Sequence) -> AnovaResult:
    """F = MS_between / MS_within across two or more groups."""
    vecs = [_vector(g, f"group {i}") for i, g in enumerate(groups)]
    k = len(vecs)
    if k < 2:
        raise ValueError("need at least 2 groups")
    if any(v.size < 2 for v in vecs):
        raise ValueError("every group needs at least 2 values")
    n_total = sum(v.size for v in vecs)
    grand = float(np.concatenate(vecs).mean())
    ss_between = sum(v.size * (float(v.mean()) - grand) ** 2 for v in vecs)
    ss_within = sum(float(((v - v.mean()) ** 2).sum()) for v in vecs)
    df_b, df_w = k - 1, n_total - k
    if ss_within == 0.0:
        if ss_between == 0.0:
            return AnovaResult(f=0.0, p_value=1.0, df_between=df_b, df_within=df_w)
        return AnovaResult(f=math.inf, p_value=0.0, df_between=df_b, df_within=df_w,
                           infinite_f=True)
    f = (ss_between / df_b) / (ss_within / df_w)
    return AnovaResult(f=f, p_value=f_sf(f, df_b, df_w), df_between=df_b, df_within=df_w)


# ---------------------------------------------------------------------------
# Performance grouping


class PerformanceGroup(Enum):
    BOTTOM25 = "bottom25"
    MIDDLE50 = "middle50"
    TOP25 = "top25"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class GroupAssignment:
    groups: Mapping[str, PerformanceGroup]

    def members(self, group: PerformanceGroup) -> list[str]:
        return sorted(k for k, g in self.groups.items() if g is group)


def performance_groups(scores: Mapping[str, float]) -> GroupAssignment:
    """Bottom 25% / middle 50% / top 25% split by score.

    Teams are ordered by (score, id) so ties resolve deterministically;
    both tails take ceil(n/4) teams.
    """
    n = len(scores)
    if n < 4:
        raise TooFewTeamsError(f"grouping needs at least 4 teams, got {n}")
    order = sorted(scores.items(), key=lambda kv: (kv[1], kv[0]))
    q = math.ceil(n / 4)
    out: dict[str, PerformanceGroup] = {}
    for i, (sid, _) in enumerate(order):
        if i < q:
            out[sid] = PerformanceGroup.BOTTOM25
        elif i >= n - q:
            out[sid] = PerformanceGroup.TOP25
        else:
            out[sid] = PerformanceGroup.MIDDLE50
    return GroupAssignment(groups=out)
