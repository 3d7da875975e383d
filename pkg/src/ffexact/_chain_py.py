"""Pure-Python Metropolis chain kernel.

Reference implementation of the walk; the compiled twin in _chain_cy.pyx
must produce bit-identical output for the same pre-drawn randomness
(same accumulation order, same libm calls).

stat_kind 0: G^2 against fixed log-means; stat_kind 1: sum of
log-factorials (conditional probability ordering, larger = less likely).
"""

from __future__ import annotations

from math import lgamma, log

import numpy as np


def statistic_value(y, stat_kind: int, logmu) -> float:
    if stat_kind == 0:
        t = 0.0
        for c in range(len(y)):
            yc = y[c]
            if yc > 0:
                t += yc * (log(yc) - logmu[c])
        return 2.0 * t
    t = 0.0
    for c in range(len(y)):
        t += lgamma(y[c] + 1.0)
    return t


def run_kernel(
    y0,
    moves,  # (nmoves, k) int64
    stat_kind: int,
    logmu,  # (k,) float64 (ignored for stat_kind 1)
    t_obs: float,
    tie_tol: float,
    move_idx,  # (steps,) int64
    signs,  # (steps,) int64, entries +-1
    logu,  # (steps,) float64
    burn_in: int,
    thin: int,
):
    """Run the walk; returns (indicators uint8, tvals float64, accepted)."""
    k = len(y0)
    steps = len(move_idx)
    y = [int(v) for v in y0]
    moves = [[int(v) for v in row] for row in np.asarray(moves)]
    logmu = [float(v) for v in logmu]
    n_rec = max(0, -(-(steps - burn_in) // thin))
    indicators = np.zeros(n_rec, dtype=np.uint8)
    tvals = np.zeros(n_rec, dtype=np.float64)
    accepted = 0
    rec = 0
    for t in range(steps):
        z = moves[move_idx[t]]
        sg = int(signs[t])
        feasible = True
        logratio = 0.0
        for c in range(k):
            zc = sg * z[c]
            if zc != 0:
                ynew = y[c] + zc
                if ynew < 0:
                    feasible = False
                    break
                logratio += lgamma(y[c] + 1.0) - lgamma(ynew + 1.0)
        if feasible and logu[t] < logratio:
            for c in range(k):
                zc = sg * z[c]
                if zc != 0:
                    y[c] += zc
            accepted += 1
        if t >= burn_in and (t - burn_in) % thin == 0:
            tv = statistic_value(y, stat_kind, logmu)
            tvals[rec] = tv
            indicators[rec] = 1 if tv >= t_obs - tie_tol else 0
            rec += 1
    return indicators, tvals, accepted


def walk_states(y0, moves, move_idx, signs, logu, burn_in: int, thin: int):
    """Same transition rule, but returns the visited states themselves
    (post burn-in, at the thinning stride) for distribution tests."""
    k = len(y0)
    steps = len(move_idx)
    y = [int(v) for v in y0]
    moves = [[int(v) for v in row] for row in np.asarray(moves)]
    visited: list[tuple[int, ...]] = []
    for t in range(steps):
        z = moves[move_idx[t]]
        sg = int(signs[t])
        feasible = True
        logratio = 0.0
        for c in range(k):
            zc = sg * z[c]
            if zc != 0:
                ynew = y[c] + zc
                if ynew < 0:
                    feasible = False
                    break
                logratio += lgamma(y[c] + 1.0) - lgamma(ynew + 1.0)
        if feasible and logu[t] < logratio:
            for c in range(k):
                zc = sg * z[c]
                if zc != 0:
                    y[c] += zc
        if t >= burn_in and (t - burn_in) % thin == 0:
            visited.append(tuple(y))
    return visited
