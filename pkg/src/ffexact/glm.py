"""Poisson main-effect model fit (IRLS/Newton), G^2, chi-square tail."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .design import CountTable, Design, build_model_matrix, sufficient_stat
from .errors import BoundaryMLEError, InvalidParameterError, UndefinedModelError

MOMENT_TOL = 1e-10
MAX_ITER = 100
MAX_HALVINGS = 30


@dataclass(frozen=True)
class FitResult:
    beta: np.ndarray  # (beta_0, ..., beta_p)
    mu: np.ndarray  # fitted means, mu_i = exp(row_i(M) . beta)
    converged: bool
    iterations: int
    moment_residual: float  # max-norm of M'(y - mu)


@dataclass(frozen=True)
class GofStatistics:
    g2: float
    df: int
    p_asymptotic: float


def _loglik(y: np.ndarray, eta: np.ndarray) -> float:
    # Poisson log-likelihood up to the constant -sum(log y_i!)
    return float(y @ eta - np.exp(eta).sum())


def fit_main_effect(y: CountTable, design: Design) -> FitResult:
    """MLE of the main-effect model by safeguarded Newton iterations.

    Stops when the moment equations M'mu = M'y hold to MOMENT_TOL in
    max-norm. Requires an interior sufficient statistic; a zero margin
    means the MLE does not exist (beta diverges) and the caller must use
    the conditional test instead.
    """
    if y.total == 0:
        raise UndefinedModelError("all counts are zero; the model is undefined")
    stat = sufficient_stat(y)
    if any(x0 == 0 or x1 == 0 for x0, x1 in stat.one_dim) or 0 in stat.diag:
        raise BoundaryMLEError(
            "a margin of the sufficient statistic is zero; the MLE does not "
            "exist - use the exact/MCMC conditional test only"
        )
    m = build_model_matrix(design).m.astype(float)
    yv = y.y.astype(float)
    target = m.T @ yv
    beta = np.zeros(design.p + 1)
    beta[0] = math.log(yv.mean() + 1e-8)
    ll = _loglik(yv, m @ beta)
    converged = False
    it = 0
    residual = float("inf")
    for it in range(1, MAX_ITER + 1):
        mu = np.exp(m @ beta)
        grad = target - m.T @ mu
        residual = float(np.abs(grad).max())
        if residual < MOMENT_TOL:
            converged = True
            break
        hess = m.T @ (mu[:, None] * m)
        step = np.linalg.solve(hess, grad)
        # halve until the log-likelihood does not decrease (up to fp noise)
        scale = 1.0
        for _ in range(MAX_HALVINGS):
            cand = beta + scale * step
            ll_new = _loglik(yv, m @ cand)
            if ll_new >= ll - 1e-10 * (abs(ll) + 1.0):
                break
            scale *= 0.5
        beta = beta + scale * step
        ll = _loglik(yv, m @ beta)
    mu = np.exp(m @ beta)
    residual = float(np.abs(target - m.T @ mu).max())
    converged = residual < MOMENT_TOL
    return FitResult(
        beta=beta, mu=mu, converged=converged, iterations=it, moment_residual=residual
    )


def g2_value(y: np.ndarray, mu: np.ndarray) -> float:
    """Likelihood-ratio statistic 2 sum y_i log(y_i / mu_i), 0 log 0 = 0."""
    total = 0.0
    for yi, mi in zip(np.asarray(y, dtype=float), np.asarray(mu, dtype=float)):
        if yi > 0:
            total += yi * math.log(yi / mi)
    return 2.0 * total


def g2_statistic(y: CountTable, fit: FitResult) -> GofStatistics:
    """G^2, its degrees of freedom, and the asymptotic chi-square p-value."""
    if not fit.converged:
        raise InvalidParameterError("fit did not converge; no asymptotic test")
    k = 2 ** (y.p - 1)
    g2 = max(g2_value(y.y, fit.mu), 0.0)
    df = k - y.p - 1
    return GofStatistics(g2=g2, df=df, p_asymptotic=chi_square_upper_tail(g2, df))


def chi_square_upper_tail(x: float, df: int) -> float:
    """Upper tail of the chi-square distribution: Q(df/2, x/2)."""
    if x < 0 or df < 1:
        raise InvalidParameterError("need x >= 0 and df >= 1")
    return _reg_upper_gamma(df / 2.0, x / 2.0)


def _reg_upper_gamma(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x).

    Lower series for x < a + 1, Lentz continued fraction otherwise;
    both converge to relative error well under 1e-12 here.
    """
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _lower_series(a, x)
    return _upper_cf(a, x)


def _lower_series(a: float, x: float) -> float:
    # P(a,x) = x^a e^-x / Gamma(a) * sum_{n>=0} x^n / (a(a+1)...(a+n))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_cf(a: float, x: float) -> float:
    # Q(a,x) = x^a e^-x / Gamma(a) * continued fraction (modified Lentz)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))
