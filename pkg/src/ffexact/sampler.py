"""Metropolis-Hastings walk over a fiber and end-to-end test orchestration.

The walk targets the conditional distribution proportional to
prod 1/y_i!: draw a move and a sign uniformly, reject proposals with a
negative entry (null transition), otherwise accept with probability
min(1, prod y_i! / prod y'_i!) in log space.

The hot loop lives in a compiled kernel (_chain_cy) when available, with
a bit-identical pure-Python fallback (_chain_py) selected at import;
FFEXACT_FORCE_PY=1 forces the fallback.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _chain_py
from .basis import MarkovBasis, minimal_markov_basis
from .design import CountTable, Design, build_design, sufficient_stat
from .errors import (
    BoundaryMLEError,
    ConfigurationError,
    EnumerationInfeasibleError,
    InvalidParameterError,
)
from .fiber import TIE_TOL, enumerate_fiber, enumeration_cap, exact_p_value
from .glm import fit_main_effect, g2_statistic

TOOL_VERSION = "0.1.0"
RNG_ALGORITHM_ID = "numpy.PCG64+SeedSequence.spawn"

try:  # compiled kernel is optional; the fallback is bit-identical
    from . import _chain_cy as _compiled
except ImportError:
    _compiled = None

if _compiled is not None and not os.environ.get("FFEXACT_FORCE_PY"):
    _kernel = _compiled
    KERNEL_BACKEND = "cython"
else:
    _kernel = _chain_py
    KERNEL_BACKEND = "python"


class GSquaredStatistic:
    """G^2 against the fixed fitted means of the observed table.

    Every fiber element shares the sufficient statistic and hence the
    same MLE, so the means are computed once and reused.
    """

    kernel_kind = 0

    def __init__(self, mu):
        self.logmu = np.log(np.asarray(mu, dtype=np.float64))

    def __call__(self, y) -> float:
        return _chain_py.statistic_value(list(y), 0, list(self.logmu))


class ProbabilityOrderingStatistic:
    """sum of log y_i!: larger means less probable under the conditional
    distribution. Fallback statistic when the MLE does not exist."""

    kernel_kind = 1
    logmu = np.zeros(0)

    def __call__(self, y) -> float:
        return _chain_py.statistic_value(list(y), 1, [])


@dataclass(frozen=True)
class ChainConfig:
    steps: int = 100_000
    burn_in: int = 10_000
    thin: int = 1
    seed: int = 0
    replicas: int = 1

    def __post_init__(self):
        if self.steps < 1 or self.burn_in < 0 or self.burn_in >= self.steps:
            raise InvalidParameterError("need 0 <= burn_in < steps")
        if self.thin < 1 or self.thin > self.steps - self.burn_in:
            raise InvalidParameterError("need 1 <= thin <= steps - burn_in")
        if self.replicas < 1:
            raise InvalidParameterError("replicas must be >= 1")


@dataclass(frozen=True)
class ChainResult:
    p_hat: float
    se: float
    accepted: int
    proposed: int
    t_observed: float
    trace_summary: tuple[float, float, float]  # (min, max, mean) of sampled T
    seed_used: str
    rng_algorithm_id: str
    n_samples: int


@dataclass(frozen=True)
class TestReport:
    p: int
    g2: float | None
    df: int
    p_asymptotic: float | None
    p_exact: float | None
    fiber_size: int | None
    p_mcmc: float
    se_mcmc: float
    statistic: str
    boundary_mle: bool
    chain: dict
    basis: dict
    tool_version: str

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "g2": self.g2,
            "df": self.df,
            "p_asymptotic": self.p_asymptotic,
            "p_exact": self.p_exact,
            "fiber_size": self.fiber_size,
            "p_mcmc": self.p_mcmc,
            "se_mcmc": self.se_mcmc,
            "statistic": self.statistic,
            "boundary_mle": self.boundary_mle,
            "chain": self.chain,
            "basis": self.basis,
            "tool_version": self.tool_version,
        }


def _batch_means_se(indicators: np.ndarray, n_batches: int = 50) -> float:
    """Batch-means standard error of the indicator mean."""
    n = len(indicators)
    if n < 2:
        return 0.0
    if n < n_batches:
        return float(indicators.std(ddof=1) / math.sqrt(n))
    blen = n // n_batches
    used = indicators[: blen * n_batches].reshape(n_batches, blen)
    means = used.mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def _draws(rng: np.random.Generator, steps: int, n_moves: int):
    move_idx = rng.integers(0, n_moves, size=steps, dtype=np.int64)
    signs = rng.integers(0, 2, size=steps, dtype=np.int64) * 2 - 1
    logu = np.log(rng.random(steps))
    return move_idx, signs, logu


def _single_chain(y0, moves_dense, statfn, config, seed_seq, t_obs) -> ChainResult:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    move_idx, signs, logu = _draws(rng, config.steps, moves_dense.shape[0])
    if hasattr(statfn, "kernel_kind"):
        indicators, tvals, accepted = _kernel.run_kernel(
            np.asarray(y0.y, dtype=np.int64),
            moves_dense,
            statfn.kernel_kind,
            np.asarray(statfn.logmu, dtype=np.float64),
            t_obs,
            TIE_TOL,
            move_idx,
            signs,
            logu,
            config.burn_in,
            config.thin,
        )
    else:
        indicators, tvals, accepted = _generic_chain(
            y0, moves_dense, statfn, t_obs, move_idx, signs, logu, config
        )
    n = len(indicators)
    return ChainResult(
        p_hat=float(indicators.mean()),
        se=_batch_means_se(indicators),
        accepted=int(accepted),
        proposed=config.steps,
        t_observed=t_obs,
        trace_summary=(float(tvals.min()), float(tvals.max()), float(tvals.mean())),
        seed_used=str(config.seed),
        rng_algorithm_id=RNG_ALGORITHM_ID,
        n_samples=n,
    )


def _generic_chain(y0, moves_dense, statfn, t_obs, move_idx, signs, logu, config):
    """Python path for arbitrary statistic callables."""
    states = _chain_py.walk_states(
        np.asarray(y0.y, dtype=np.int64),
        moves_dense,
        move_idx,
        signs,
        logu,
        config.burn_in,
        config.thin,
    )
    tvals = np.array([statfn(np.asarray(s, dtype=np.int64)) for s in states])
    indicators = (tvals >= t_obs - TIE_TOL).astype(np.uint8)
    accepted = sum(1 for a, b in zip(states, states[1:]) if a != b)
    return indicators, tvals, accepted


def run_chain(y0: CountTable, basis: MarkovBasis, statfn, config: ChainConfig) -> ChainResult:
    """Run the Metropolis walk (config.replicas independent chains pooled).

    Replica seeds come from SeedSequence(config.seed).spawn; the pooled
    estimate is the equal-weight mean of the replica indicator means.
    """
    t_obs = float(statfn(np.asarray(y0.y, dtype=np.int64)))
    if not basis.moves:
        small = enumerate_fiber(sufficient_stat(y0), y0.p, cap=1)
        if small.truncated:
            raise ConfigurationError(
                "empty basis but the fiber has more than one element"
            )
        n = max(0, -(-(config.steps - config.burn_in) // config.thin))
        return ChainResult(
            p_hat=1.0,
            se=0.0,
            accepted=0,
            proposed=config.steps,
            t_observed=t_obs,
            trace_summary=(t_obs, t_obs, t_obs),
            seed_used=str(config.seed),
            rng_algorithm_id=RNG_ALGORITHM_ID,
            n_samples=n * config.replicas,
        )
    moves_dense = np.ascontiguousarray(
        [mv.dense() for mv in basis.moves], dtype=np.int64
    )
    children = np.random.SeedSequence(config.seed).spawn(config.replicas)
    results = [
        _single_chain(y0, moves_dense, statfn, config, child, t_obs)
        for child in children
    ]
    if len(results) == 1:
        return results[0]
    r = len(results)
    return ChainResult(
        p_hat=float(np.mean([res.p_hat for res in results])),
        se=float(math.sqrt(sum(res.se**2 for res in results)) / r),
        accepted=sum(res.accepted for res in results),
        proposed=sum(res.proposed for res in results),
        t_observed=t_obs,
        trace_summary=(
            min(res.trace_summary[0] for res in results),
            max(res.trace_summary[1] for res in results),
            float(np.mean([res.trace_summary[2] for res in results])),
        ),
        seed_used=str(config.seed),
        rng_algorithm_id=RNG_ALGORITHM_ID,
        n_samples=sum(res.n_samples for res in results),
    )


def estimate_p(
    y0: CountTable,
    design: Design | None = None,
    config: ChainConfig = ChainConfig(),
    exact_cap: int | None = None,
) -> TestReport:
    """Full conditional test: asymptotic (when the MLE exists), exact
    (when the fiber is enumerable), and MCMC p-values in one report."""
    p = y0.p
    if design is None:
        design = build_design(p)
    k = 2 ** (p - 1)
    df = k - p - 1
    g2 = p_asym = None
    boundary = False
    try:
        fit = fit_main_effect(y0, design)
        gof = g2_statistic(y0, fit)
        g2, p_asym = gof.g2, gof.p_asymptotic
        statfn = GSquaredStatistic(fit.mu)
        stat_name = "g2"
    except BoundaryMLEError:
        boundary = True
        statfn = ProbabilityOrderingStatistic()
        stat_name = "probability_ordering"

    basis = minimal_markov_basis(p)
    cap = exact_cap if exact_cap is not None else enumeration_cap()
    p_exact = fiber_size = None
    try:
        p_exact, fiber_size = exact_p_value(y0, statfn, cap=cap)
    except EnumerationInfeasibleError:
        pass

    result = run_chain(y0, basis, statfn, config)
    return TestReport(
        p=p,
        g2=g2,
        df=df,
        p_asymptotic=p_asym,
        p_exact=p_exact,
        fiber_size=fiber_size,
        p_mcmc=result.p_hat,
        se_mcmc=result.se,
        statistic=stat_name,
        boundary_mle=boundary,
        chain={
            "steps": config.steps,
            "burn_in": config.burn_in,
            "thin": config.thin,
            "seed": config.seed,
            "replicas": config.replicas,
            "rng_algorithm_id": RNG_ALGORITHM_ID,
            "accepted": result.accepted,
            "proposed": result.proposed,
            "n_samples": result.n_samples,
            "t_observed": result.t_observed,
            "trace_summary": list(result.trace_summary),
            "kernel_backend": KERNEL_BACKEND,
        },
        basis={"kind": basis.kind, "moves": len(basis.moves)},
        tool_version=TOOL_VERSION,
    )
