"""Stationarity testing, paired differencing, and pairwise Granger F-tests.

The numerical core of the package: OLS fitting via QR decomposition,
F-distribution tail probabilities through the regularized incomplete beta
function, the augmented Dickey-Fuller unit-root test with MacKinnon
approximate p-values, and the per-(alter, topic) causality scan over
lags 1..max_lag.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DegenerateSeriesError,
    InsufficientDataError,
    NonStationarizableError,
    SingularDesignError,
)
from .series import TopicSeries

logger = logging.getLogger(__name__)

DEFAULT_MAX_LAG = 8
DEFAULT_MAX_DIFF = 2
DEFAULT_ALPHA = 0.05

# Skip reason codes used by causality_scan (rendered by the report module).
SKIP_DEGENERATE = "DEGEN"
SKIP_NONSTATIONARY = "NONSTAT"
SKIP_TOO_SHORT = "SHORT"
SKIP_SINGULAR = "SINGULAR"

CORRECTION_NONE = "none"
CORRECTION_BH = "benjamini_hochberg"


# ---------------------------------------------------------------------------
# Ordinary least squares
# ---------------------------------------------------------------------------

@dataclass
class OlsFit:
    """OLS solution with the quantities the ADF and Granger tests consume."""

    coefficients: np.ndarray
    std_errors: np.ndarray
    residuals: np.ndarray
    rss: float
    n_obs: int
    n_params: int

    @property
    def df_resid(self) -> int:
        return self.n_obs - self.n_params


def ols(y, X) -> OlsFit:
    """Fit y = X beta + eps by QR decomposition.

    Standard errors come from s^2 (X'X)^-1 with s^2 = rss / df_resid.
    Rank deficiency is detected from the R diagonal at 1e-10 relative
    tolerance and raises SingularDesignError.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, p = X.shape
    if y.shape != (n,):
        raise ValueError(f"y has shape {y.shape}, expected ({n},)")
    if n <= p:
        raise InsufficientDataError(f"need more rows ({n}) than columns ({p})")

    Q, R = np.linalg.qr(X)
    rdiag = np.abs(np.diag(R))
    if rdiag.max() == 0.0 or rdiag.min() < 1e-10 * rdiag.max():
        raise SingularDesignError("design matrix is rank deficient")

    beta = np.linalg.solve(R, Q.T @ y)
    residuals = y - X @ beta
    rss = float(residuals @ residuals)
    s2 = rss / (n - p)
    r_inv = np.linalg.solve(R, np.eye(p))
    xtx_inv = r_inv @ r_inv.T
    std_errors = np.sqrt(s2 * np.diag(xtx_inv))
    return OlsFit(beta, std_errors, residuals, rss, n, p)


# ---------------------------------------------------------------------------
# F distribution via the regularized incomplete beta function
# ---------------------------------------------------------------------------

def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    MAXIT, EPS, FPMIN = 300, 1e-15, 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # Use the representation that converges fastest, switch at the mean.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_sf(x: float, d1: int, d2: int) -> float:
    """Upper-tail probability P[F(d1, d2) > x]."""
    if d1 < 1 or d2 < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if x < 0.0 or not math.isfinite(x):
        if x == math.inf:
            return 0.0
        raise ValueError(f"x must be nonnegative, got {x}")
    if x == 0.0:
        return 1.0
    return betainc_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x))


def f_cdf(x: float, d1: int, d2: int) -> float:
    """Lower-tail probability P[F(d1, d2) <= x]."""
    if d1 < 1 or d2 < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if x <= 0.0:
        return 0.0
    return betainc_reg(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2))


# ---------------------------------------------------------------------------
# Augmented Dickey-Fuller test
# ---------------------------------------------------------------------------

# MacKinnon (1994) response-surface coefficients for the Dickey-Fuller tau
# distribution, constant-only regression, one I(1) series.  Three regimes:
# below tau_min / above tau_max the p-value saturates at 0 / 1; in between,
# p = Phi(polynomial(stat)) with the small-p polynomial left of tau_star and
# the large-p polynomial right of it.
_TAU_MAX_C = 2.74
_TAU_MIN_C = -18.83
_TAU_STAR_C = -1.61
_TAU_SMALLP_C = (2.1659, 1.4412, 3.8269e-2)
_TAU_LARGEP_C = (1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2)

# MacKinnon (2010) asymptotic critical values, constant case, at 1/5/10%.
ADF_CRITICAL_VALUES_C = {"1%": -3.43035, "5%": -2.86154, "10%": -2.56677}


def _norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def mackinnon_pvalue(stat: float) -> float:
    """Approximate p-value of an ADF tau statistic (constant-only case)."""
    if stat > _TAU_MAX_C:
        return 1.0
    if stat < _TAU_MIN_C:
        return 0.0
    coefs = _TAU_SMALLP_C if stat <= _TAU_STAR_C else _TAU_LARGEP_C
    poly = 0.0
    for c in reversed(coefs):
        poly = poly * stat + c
    return _norm_cdf(poly)


@dataclass
class AdfResult:
    """Outcome of the augmented Dickey-Fuller test (constant-only regression)."""

    statistic: float
    p_value: float
    lags_used: int
    regression: str
    is_stationary: bool
    n_obs: int


def _adf_design(y: np.ndarray, n_lags: int, trim: int):
    """Build (target, X) for the ADF regression with `trim` rows cut from the front.

    Target is dy_t for t = trim+1..T-1 (level indexing); regressors are a
    constant, the lagged level y_{t-1}, and dy_{t-1}..dy_{t-n_lags}.
    """
    dy = np.diff(y)
    n = len(dy) - trim
    target = dy[trim:]
    cols = [np.ones(n), y[trim : len(y) - 1]]
    for j in range(1, n_lags + 1):
        cols.append(dy[trim - j : len(dy) - j])
    return target, np.column_stack(cols)


def _aic(rss: float, n: int, k: int) -> float:
    return n * math.log(rss / n) + 2 * k


def adf_test(y, max_lag: int | None = None, alpha: float = DEFAULT_ALPHA) -> AdfResult:
    """ADF unit-root test with constant term and AIC-selected lag order.

    The regression is dy_t = c + gamma*y_{t-1} + sum_i delta_i*dy_{t-i} + eps.
    The lag order is chosen over 0..max_lag by AIC on a common sample (all
    candidates trimmed to the max_lag length), then the statistic comes from
    a refit on the full usable sample at the chosen order.  max_lag defaults
    to floor(12 * (T/100)^0.25), capped so at least 12 observations remain.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValueError("y must be one-dimensional")
    T = len(y)
    if T >= 1 and np.ptp(y) == 0.0:
        raise DegenerateSeriesError("series is constant")
    if T - 1 < 12:
        raise InsufficientDataError(f"need at least 13 observations, got {T}")

    # Feasibility caps: the common AIC sample must keep >= 12 rows and the
    # largest candidate model must keep positive residual df.
    hard_cap = min(T - 13, (T - 4) // 2)
    if max_lag is None:
        max_lag = int(math.floor(12.0 * (T / 100.0) ** 0.25))
    if max_lag < 0:
        raise ValueError("max_lag must be nonnegative")
    max_lag = min(max_lag, hard_cap)
    if max_lag < 0:
        raise InsufficientDataError(f"series of length {T} too short for lag search")

    best_lag, best_aic = 0, math.inf
    for p in range(0, max_lag + 1):
        target, X = _adf_design(y, p, trim=max_lag)
        fit = ols(target, X)
        crit = _aic(fit.rss, fit.n_obs, fit.n_params)
        if crit < best_aic:
            best_aic, best_lag = crit, p

    target, X = _adf_design(y, best_lag, trim=best_lag)
    fit = ols(target, X)
    stat = float(fit.coefficients[1] / fit.std_errors[1])
    p_value = mackinnon_pvalue(stat)
    return AdfResult(
        statistic=stat,
        p_value=p_value,
        lags_used=best_lag,
        regression="constant",
        is_stationary=p_value < alpha,
        n_obs=fit.n_obs,
    )


# ---------------------------------------------------------------------------
# Differencing
# ---------------------------------------------------------------------------

def difference(y) -> np.ndarray:
    """First difference: output[i] = y[i+1] - y[i]."""
    y = np.asarray(y, dtype=float)
    if len(y) < 2:
        raise InsufficientDataError("need at least 2 observations to difference")
    return np.diff(y)


def make_stationary_pair(
    x,
    y,
    max_diff: int = DEFAULT_MAX_DIFF,
    alpha: float = DEFAULT_ALPHA,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Difference BOTH series until both pass the ADF test at `alpha`.

    Both series always receive the same differencing order.  Raises
    NonStationarizableError when either series still fails at max_diff, and
    propagates DegenerateSeriesError / InsufficientDataError from the ADF
    stage (constant or too-short series).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise ValueError("series must have equal length")

    diff_order = 0
    while True:
        rx = adf_test(x, alpha=alpha)
        ry = adf_test(y, alpha=alpha)
        if rx.is_stationary and ry.is_stationary:
            return x, y, diff_order
        if diff_order >= max_diff:
            raise NonStationarizableError(
                f"pair still non-stationary after {max_diff} differencing passes"
            )
        x = difference(x)
        y = difference(y)
        diff_order += 1


# ---------------------------------------------------------------------------
# Granger causality
# ---------------------------------------------------------------------------

@dataclass
class GrangerResult:
    """One F-test of x Granger-causing y at a single lag."""

    lag: int
    f_stat: float
    p_value: float
    n_obs_effective: int
    alter: str = ""
    topic: int = -1
    diff_order: int = 0
    perfect_fit: bool = False


def _lag_columns(v: np.ndarray, lag: int) -> list[np.ndarray]:
    n = len(v)
    return [v[lag - j : n - j] for j in range(1, lag + 1)]


def granger_test(x, y, lag: int) -> GrangerResult:
    """Test whether lags 1..lag of x improve the autoregression of y.

    Restricted model: y_t ~ const + y_{t-1..t-lag}.  Unrestricted adds
    x_{t-1..t-lag}.  F = ((RSS_r - RSS_u)/lag) / (RSS_u/(n - 2*lag - 1))
    with n the effective observation count after lag trimming.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if lag < 1:
        raise ValueError("lag must be >= 1")
    if len(x) != len(y):
        raise ValueError("series must have equal length")
    if len(y) < 3 * lag + 10:
        raise InsufficientDataError(
            f"need at least {3 * lag + 10} observations for lag {lag}, got {len(y)}"
        )

    n = len(y) - lag
    target = y[lag:]
    restricted = np.column_stack([np.ones(n)] + _lag_columns(y, lag))
    unrestricted = np.column_stack(
        [np.ones(n)] + _lag_columns(y, lag) + _lag_columns(x, lag)
    )

    fit_r = ols(target, restricted)
    fit_u = ols(target, unrestricted)
    df2 = n - 2 * lag - 1

    if fit_u.rss == 0.0:
        return GrangerResult(
            lag=lag, f_stat=math.inf, p_value=0.0, n_obs_effective=n, perfect_fit=True
        )
    f_stat = max(((fit_r.rss - fit_u.rss) / lag) / (fit_u.rss / df2), 0.0)
    return GrangerResult(
        lag=lag, f_stat=f_stat, p_value=f_sf(f_stat, lag, df2), n_obs_effective=n
    )


def bh_adjust(p_values) -> np.ndarray:
    """Benjamini-Hochberg step-up adjusted p-values (FDR)."""
    p = np.asarray(p_values, dtype=float)
    m = len(p)
    if m == 0:
        return p.copy()
    order = np.argsort(p, kind="stable")
    adjusted = np.empty(m)
    running = 1.0
    for rank in range(m, 0, -1):
        idx = order[rank - 1]
        running = min(running, p[idx] * m / rank)
        adjusted[idx] = running
    return adjusted


@dataclass
class PairOutcome:
    """All per-lag results for one (alter, topic) pair, or its skip reason."""

    alter: str
    topic: int
    results: list[GrangerResult] = field(default_factory=list)
    best: GrangerResult | None = None
    diff_order: int | None = None
    skip_reason: str | None = None
    adjusted_p: float | None = None


@dataclass
class CausalityMatrix:
    """Scan output: one PairOutcome per (alter, topic), ordered."""

    ego: str
    alters: list[str]
    n_topics: int
    max_lag: int
    alpha: float
    correction: str
    pairs: list[PairOutcome]

    def pair(self, alter: str, topic: int) -> PairOutcome:
        for p in self.pairs:
            if p.alter == alter and p.topic == topic:
                return p
        raise KeyError((alter, topic))

    def significant(self, outcome: PairOutcome) -> bool:
        """Significance of a pair's best lag at alpha, honoring the correction."""
        if outcome.best is None:
            return False
        if self.correction == CORRECTION_BH:
            return outcome.adjusted_p is not None and outcome.adjusted_p <= self.alpha
        return outcome.best.p_value < self.alpha

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "ego": self.ego,
            "alters": list(self.alters),
            "n_topics": self.n_topics,
            "max_lag": self.max_lag,
            "alpha": self.alpha,
            "correction": self.correction,
            "best_lag_rule": "argmin p, ties to smaller lag",
            "pairs": [
                {
                    "alter": p.alter,
                    "topic": p.topic,
                    "skip_reason": p.skip_reason,
                    "diff_order": p.diff_order,
                    "adjusted_p": p.adjusted_p,
                    "best_lag": p.best.lag if p.best else None,
                    "results": [
                        {
                            "lag": r.lag,
                            "f_stat": r.f_stat if math.isfinite(r.f_stat) else None,
                            "p_value": r.p_value,
                            "n_obs_effective": r.n_obs_effective,
                            "perfect_fit": r.perfect_fit,
                        }
                        for r in p.results
                    ],
                }
                for p in self.pairs
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CausalityMatrix":
        pairs = []
        for pd in d["pairs"]:
            results = [
                GrangerResult(
                    lag=rd["lag"],
                    f_stat=math.inf if rd["f_stat"] is None else rd["f_stat"],
                    p_value=rd["p_value"],
                    n_obs_effective=rd["n_obs_effective"],
                    alter=pd["alter"],
                    topic=pd["topic"],
                    diff_order=pd["diff_order"] or 0,
                    perfect_fit=rd["perfect_fit"],
                )
                for rd in pd["results"]
            ]
            best = None
            if pd["best_lag"] is not None:
                best = next(r for r in results if r.lag == pd["best_lag"])
            pairs.append(
                PairOutcome(
                    alter=pd["alter"],
                    topic=pd["topic"],
                    results=results,
                    best=best,
                    diff_order=pd["diff_order"],
                    skip_reason=pd["skip_reason"],
                    adjusted_p=pd["adjusted_p"],
                )
            )
        return cls(
            ego=d["ego"],
            alters=list(d["alters"]),
            n_topics=d["n_topics"],
            max_lag=d["max_lag"],
            alpha=d["alpha"],
            correction=d["correction"],
            pairs=pairs,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv_rows(self) -> list[list[str]]:
        """Summary rows: alter, topic, best_lag, f_stat, p_value, diff_order, skip_reason."""
        rows = [["alter", "topic", "best_lag", "f_stat", "p_value", "diff_order", "skip_reason"]]
        for p in self.pairs:
            if p.best is None:
                rows.append([p.alter, str(p.topic), "", "", "", "", p.skip_reason or ""])
            else:
                rows.append(
                    [
                        p.alter,
                        str(p.topic),
                        str(p.best.lag),
                        repr(p.best.f_stat) if math.isfinite(p.best.f_stat) else "inf",
                        repr(p.best.p_value),
                        str(p.diff_order),
                        "",
                    ]
                )
        return rows


def _series_lookup(series: list[TopicSeries]) -> dict[tuple[str, int], np.ndarray]:
    return {(s.account, s.topic): np.asarray(s.counts, dtype=float) for s in series}


def causality_scan(
    series: list[TopicSeries],
    ego: str,
    alters: list[str],
    max_lag: int = DEFAULT_MAX_LAG,
    alpha: float = DEFAULT_ALPHA,
    correction: str = CORRECTION_NONE,
    max_diff: int = DEFAULT_MAX_DIFF,
) -> CausalityMatrix:
    """Granger-scan every (alter, topic) pair against the ego's series.

    Per pair: difference both series to joint stationarity, then run the
    per-lag F-test for lags 1..max_lag.  Best lag is argmin p with ties to
    the smaller lag.  Pairs that cannot be tested are recorded with a skip
    reason instead of results.  Optional Benjamini-Hochberg correction is
    applied across the best-lag p-values of all tested pairs.
    """
    if correction not in (CORRECTION_NONE, CORRECTION_BH):
        raise ValueError(f"unknown correction {correction!r}")
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    lookup = _series_lookup(series)
    topics = sorted({t for (_, t) in lookup})
    if not any(acc == ego for (acc, _) in lookup):
        raise ValueError(f"ego account {ego!r} has no series")

    pairs: list[PairOutcome] = []
    for alter in alters:
        for topic in topics:
            outcome = PairOutcome(alter=alter, topic=topic)
            pairs.append(outcome)
            x = lookup.get((alter, topic))
            y = lookup.get((ego, topic))
            if x is None or y is None:
                outcome.skip_reason = SKIP_TOO_SHORT
                continue
            try:
                xs, ys, diff_order = make_stationary_pair(x, y, max_diff=max_diff, alpha=alpha)
            except DegenerateSeriesError:
                outcome.skip_reason = SKIP_DEGENERATE
                continue
            except NonStationarizableError:
                outcome.skip_reason = SKIP_NONSTATIONARY
                continue
            except InsufficientDataError:
                outcome.skip_reason = SKIP_TOO_SHORT
                continue

            outcome.diff_order = diff_order
            singular = False
            for lag in range(1, max_lag + 1):
                try:
                    r = granger_test(xs, ys, lag)
                except InsufficientDataError:
                    break  # higher lags only get shorter
                except (SingularDesignError, DegenerateSeriesError):
                    singular = True
                    continue
                r = replace(r, alter=alter, topic=topic, diff_order=diff_order)
                outcome.results.append(r)

            if not outcome.results:
                outcome.skip_reason = SKIP_SINGULAR if singular else SKIP_TOO_SHORT
                outcome.diff_order = None
                continue
            best = outcome.results[0]
            for r in outcome.results[1:]:
                if r.p_value < best.p_value:
                    best = r
            outcome.best = best

    if correction == CORRECTION_BH:
        tested = [p for p in pairs if p.best is not None]
        adjusted = bh_adjust([p.best.p_value for p in tested])
        for p, adj in zip(tested, adjusted):
            p.adjusted_p = float(adj)

    skip_count = sum(1 for p in pairs if p.skip_reason)
    if skip_count:
        logger.info("causality_scan skipped %d of %d pairs", skip_count, len(pairs))
    return CausalityMatrix(
        ego=ego,
        alters=list(alters),
        n_topics=len(topics),
        max_lag=max_lag,
        alpha=alpha,
        correction=correction,
        pairs=pairs,
    )
