"""Fitting algorithms.

* ``ls_fit`` -- ordinary least squares on all rows or a subset.
* ``lst_fit_aa1`` -- randomized pair/perturbation search for the least sum
  of squares of depth-trimmed residuals: candidate coefficients are seeded
  on region boundaries (where two residuals are equal) and nudged into the
  adjacent regions, then each new region is resolved by an LS fit on its
  kept set.
* ``lst_fit_aa2`` -- elemental-subset search with concentration: exact
  p-point interpolation fits, refined by LS on the kept set whenever the
  trimmed objective improves.
* ``lst_oracle`` -- brute-force grid minimizer for p <= 2, independent of
  the kernel code paths, used to validate the randomized searches.
* ``lts_fit`` -- FAST-LTS style baseline (square first, trim after).

All randomized fits are deterministic given their config seed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import core
from ._kernels import h_smallest, trim_stats
from .core import (
    Dataset,
    DegenerateDesignError,
    RankDeficientError,
    TooManySingularDrawsError,
    NoValidPairsError,
    UnsupportedDimensionError,
)

__all__ = [
    "Aa1Config",
    "Aa2Config",
    "LtsConfig",
    "FitReport",
    "ls_fit",
    "ls_report",
    "lst_fit_aa1",
    "lst_fit_aa2",
    "lst_oracle",
    "lts_fit",
    "verify_fixed_point",
]

#: Relative tolerance for treating two objective values as equal.
_Q_EQ_RTOL = 1e-12


@dataclass
class Aa1Config:
    """Pair/perturbation search parameters.

    ``t_ls_budget`` caps the number of LS solves (one per newly visited
    region); ``max_pair_draws`` caps index-pair draws; ``delta_rel`` sizes
    the boundary-crossing nudge as ``delta_rel * max(1, |coordinate|)``.
    ``final_polish`` finishes with LS-on-kept-set iterations, which never
    increase the objective and land the fit on its own kept set.
    """

    alpha: float = 1.0
    t_ls_budget: int = 300
    max_pair_draws: int = 1000
    delta_rel: float = 0.1
    seed: int = 0
    final_polish: bool = True


@dataclass
class Aa2Config:
    """Elemental-subset search parameters.

    ``n_starts=None`` resolves to ``min(C(n, p), 300 * (p - 1))`` at fit
    time.  ``init`` is "zero" (start from an unevaluated sentinel) or "ls"
    (seed the incumbent with the full LS fit).
    """

    alpha: float = 1.0
    n_starts: Optional[int] = None
    seed: int = 0
    max_singular_redraws: int = 100
    init: str = "zero"
    final_polish: bool = True


@dataclass
class LtsConfig:
    """FAST-LTS parameters; ``h=None`` resolves to ``(n + p + 1) // 2``."""

    h: Optional[int] = None
    n_starts: int = 500
    c_steps_initial: int = 2
    n_finalists: int = 10
    seed: int = 0
    max_singular_redraws: int = 100


@dataclass
class FitReport:
    """Estimator output.

    ``q`` is the method's own objective recomputed at ``beta`` (trimmed sum
    of squares for the depth-trimmed methods, h-trimmed sum for LTS, full
    RSS for LS) and ``kept`` the index set the objective sums over.
    """

    method: str
    beta: np.ndarray
    q: float
    kept: np.ndarray
    ls_calls: int = 0
    pairs_sampled: int = 0
    subsets_sampled: int = 0
    elapsed: float = 0.0
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "beta": [float(b) for b in self.beta],
            "q": float(self.q),
            "kept": [int(i) for i in self.kept],
            "ls_calls": self.ls_calls,
            "pairs_sampled": self.pairs_sampled,
            "subsets_sampled": self.subsets_sampled,
            "elapsed_s": self.elapsed,
            "seed": self.seed,
        }


def ls_fit(data: Dataset, subset=None) -> np.ndarray:
    """Least squares on the given rows (all rows when subset is None).

    Solved through an orthogonal decomposition (LAPACK lstsq); raises
    ``RankDeficientError`` when the selected design has numerical rank < p.
    """
    W = data.design
    y = data.response
    if subset is not None:
        idx = np.sort(np.asarray(subset, dtype=np.intp))
        if idx.size < data.p:
            raise RankDeficientError(
                f"subset of size {idx.size} cannot determine {data.p} coefficients"
            )
        W = W[idx]
        y = y[idx]
    beta, _res, rank, _sv = np.linalg.lstsq(W, y, rcond=None)
    if rank < data.p:
        raise RankDeficientError(f"design rank {rank} < p={data.p}")
    return beta


def _objective(data: Dataset, beta, alpha: float) -> float:
    r = data.response - data.design @ beta
    return trim_stats(r, alpha)[5]


def _kept_at(data: Dataset, beta, alpha: float) -> np.ndarray:
    r = data.response - data.design @ beta
    mask = trim_stats(r, alpha)[4]
    return np.flatnonzero(mask)


def _q_equal(a: float, b: float) -> bool:
    if a == b:
        return True
    if not (math.isfinite(a) and math.isfinite(b)):
        return False
    return abs(a - b) <= _Q_EQ_RTOL * max(1.0, abs(a), abs(b))


def _concentrate(data, beta, q, alpha, trace):
    """Iterate LS on the current kept set while the objective does not grow.

    Stops at a fixed point (the LS refit reproduces beta), on a kept-set
    cycle, or when a refit would increase the objective.  Returns
    ``(beta, q, ls_calls_used)``.
    """
    ls_used = 0
    seen = set()
    for _ in range(60):
        kept = _kept_at(data, beta, alpha)
        key = kept.tobytes()
        if key in seen:
            break
        seen.add(key)
        try:
            bls = ls_fit(data, kept)
        except RankDeficientError:
            break
        ls_used += 1
        if np.array_equal(bls, beta):
            break
        qls = _objective(data, bls, alpha)
        if trace is not None:
            trace.append((bls, qls))
        if qls < q or _q_equal(qls, q):
            beta, q = bls, qls
        else:
            break
    return beta, q, ls_used


def _finish_lst_report(data, method, beta, alpha, *, ls_calls, pairs, subsets,
                       seed, t0) -> FitReport:
    r = data.response - data.design @ beta
    _m, _s, _d, _depths, mask, q, _kc = trim_stats(r, alpha)
    return FitReport(
        method=method,
        beta=beta,
        q=q,
        kept=np.flatnonzero(mask),
        ls_calls=ls_calls,
        pairs_sampled=pairs,
        subsets_sampled=subsets,
        elapsed=time.perf_counter() - t0,
        seed=seed,
    )


def _trimmed_mean_fit(data: Dataset, alpha: float, method: str, seed, t0) -> FitReport:
    """Exact p=1 solution.

    All residuals shift by the same constant as the intercept moves, so
    depths do not depend on the coefficient: the kept set is fixed and the
    minimizer is the mean of the kept responses (a depth-trimmed mean).
    """
    y = data.response
    _m, _s, _d, _depths, mask, _q, _kc = trim_stats(y, alpha)
    beta = np.array([float(np.mean(y[mask]))])
    return _finish_lst_report(
        data, method, beta, alpha, ls_calls=0, pairs=0, subsets=0, seed=seed, t0=t0
    )


def ls_report(data: Dataset) -> FitReport:
    """Plain least squares wrapped in a FitReport (q = full RSS)."""
    t0 = time.perf_counter()
    beta = ls_fit(data)
    r = data.response - data.design @ beta
    return FitReport(
        method="ls",
        beta=beta,
        q=float(r @ r),
        kept=np.arange(data.n, dtype=np.intp),
        ls_calls=1,
        elapsed=time.perf_counter() - t0,
    )


def _perturb_duplicates(carriers, rng):
    """Nudge exact-duplicate carrier rows apart by 1e-8 * column scale."""
    X = carriers.copy()
    scale = np.maximum(1.0, np.abs(X).max(axis=0)) if X.size else np.ones(X.shape[1])
    _uniq, inverse, counts = np.unique(X, axis=0, return_inverse=True, return_counts=True)
    first_seen = set()
    for i in range(X.shape[0]):
        g = inverse[i]
        if counts[g] > 1:
            if g in first_seen:
                X[i] += 1e-8 * scale * rng.standard_normal(X.shape[1])
            else:
                first_seen.add(g)
    return X


def lst_fit_aa1(data: Dataset, cfg: Optional[Aa1Config] = None, trace=None) -> FitReport:
    """Randomized boundary-crossing search for the depth-trimmed LS fit.

    Draws index pairs (i, j); the coefficient vectors with slope
    ``(y_i - y_j) / (x_ik - x_jk)`` in coordinate k and intercept 0 or 1
    sit on a boundary where residuals i and j coincide.  Each of the 4p
    one-coordinate nudges of those vectors lands in an adjacent region; for
    every region not yet visited (deduplicated by kept set), the LS fit on
    its kept set is evaluated under the trimmed objective and the best fit
    is kept.  Stops when ``t_ls_budget`` LS solves are spent or
    ``max_pair_draws`` pairs are drawn.
    """
    cfg = cfg or Aa1Config()
    t0 = time.perf_counter()
    alpha = core._check_alpha(cfg.alpha)
    if cfg.t_ls_budget < 1 or cfg.max_pair_draws < 1:
        raise ValueError("t_ls_budget and max_pair_draws must be >= 1")
    if data.p == 1:
        return _trimmed_mean_fit(data, alpha, "lst-aa1", cfg.seed, t0)
    if not core.design_rank_ok(data):
        raise DegenerateDesignError("design matrix is rank deficient")
    if data.n < data.p + 1:
        raise ValueError(f"need n >= p + 1, got n={data.n}, p={data.p}")

    rng = np.random.default_rng(cfg.seed)
    n, p = data.n, data.p
    y = data.response
    # Carriers used only to form pairs/slopes; duplicates may get nudged
    # apart, but all fits and objective values use the original data.
    pair_x = data.carriers
    perturbed = False
    consec_skip = 0

    seen: set[bytes] = set()
    best_q = math.inf
    best_beta = None
    ls_calls = 0
    pairs = 0
    budget_left = True

    while budget_left and pairs < cfg.max_pair_draws and ls_calls < cfg.t_ls_budget:
        i = int(rng.integers(n))
        j = int(rng.integers(n - 1))
        if j >= i:
            j += 1
        pairs += 1
        dx = pair_x[i] - pair_x[j]
        k = int(np.argmax(np.abs(dx)))
        if dx[k] == 0.0:
            consec_skip += 1
            if consec_skip >= 50:
                if perturbed:
                    raise NoValidPairsError("carrier rows remain identical")
                pair_x = _perturb_duplicates(pair_x, rng)
                perturbed = True
                consec_skip = 0
            continue
        consec_skip = 0
        slope = (y[i] - y[j]) / (pair_x[i, k] - pair_x[j, k])
        base = np.zeros(p)
        base[k + 1] = slope
        for intercept in (0.0, 1.0):
            for l in range(p):
                for sgn in (1.0, -1.0):
                    if ls_calls >= cfg.t_ls_budget:
                        budget_left = False
                        break
                    beta = base.copy()
                    beta[0] = intercept
                    beta[l] += sgn * cfg.delta_rel * max(1.0, abs(beta[l]))
                    r = y - data.design @ beta
                    _m, _s, _d, depths, mask, _q, _kc = trim_stats(r, alpha)
                    kept = np.flatnonzero(mask)
                    # Note: no strict-ordering gate on the kept depths here.
                    # With the midpoint convention for even-length medians the
                    # two central residuals are exactly equidistant from the
                    # median, so their depths tie for every beta and a strict
                    # ordering never exists at even n.  The kept-set dedup
                    # below is what actually prevents repeated region work.
                    key = kept.tobytes()
                    if key in seen:
                        continue
                    seen.add(key)
                    try:
                        bls = ls_fit(data, kept)
                    except RankDeficientError:
                        continue
                    ls_calls += 1
                    q = _objective(data, bls, alpha)
                    if trace is not None:
                        trace.append((bls, q))
                    if q < best_q:
                        best_q, best_beta = q, bls
                if not budget_left:
                    break
            if not budget_left:
                break

    if best_beta is None:
        # No region produced a usable fit (pathological inputs); fall back
        # to the plain LS fit as the single evaluated candidate.
        best_beta = ls_fit(data)
        ls_calls += 1
        best_q = _objective(data, best_beta, alpha)
        if trace is not None:
            trace.append((best_beta, best_q))

    if cfg.final_polish:
        best_beta, best_q, used = _concentrate(data, best_beta, best_q, alpha, trace)
        ls_calls += used

    return _finish_lst_report(
        data, "lst-aa1", best_beta, alpha,
        ls_calls=ls_calls, pairs=pairs, subsets=0, seed=cfg.seed, t0=t0,
    )


def lst_fit_aa2(data: Dataset, cfg: Optional[Aa2Config] = None, trace=None) -> FitReport:
    """Elemental-subset search with concentration for the trimmed LS fit.

    Each round interpolates p random observations exactly; when the trimmed
    objective beats the incumbent, the fit is refined by LS on its kept set
    until the objective stops improving.  Rounds that fail to improve count
    toward the start budget.
    """
    cfg = cfg or Aa2Config()
    t0 = time.perf_counter()
    alpha = core._check_alpha(cfg.alpha)
    if data.p == 1:
        return _trimmed_mean_fit(data, alpha, "lst-aa2", cfg.seed, t0)
    if not core.design_rank_ok(data):
        raise DegenerateDesignError("design matrix is rank deficient")
    if data.n <= data.p:
        raise ValueError(f"need n > p, got n={data.n}, p={data.p}")

    n, p = data.n, data.p
    n_starts = cfg.n_starts
    if n_starts is None:
        n_starts = min(math.comb(n, p), 300 * (p - 1))
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")

    rng = np.random.default_rng(cfg.seed)
    W = data.design
    y = data.response

    best_q = math.inf
    best_beta = None
    ls_calls = 0
    subsets = 0

    if cfg.init == "ls":
        best_beta = ls_fit(data)
        ls_calls += 1
        best_q = _objective(data, best_beta, alpha)
        if trace is not None:
            trace.append((best_beta, best_q))
    elif cfg.init != "zero":
        raise ValueError(f"unknown init {cfg.init!r}")

    failed_rounds = 0
    singular_run = 0
    while failed_rounds <= n_starts:
        idx = rng.choice(n, size=p, replace=False)
        subsets += 1
        try:
            beta = np.linalg.solve(W[idx], y[idx])
        except np.linalg.LinAlgError:
            beta = None
        if beta is None or not np.isfinite(beta).all():
            singular_run += 1
            if singular_run > cfg.max_singular_redraws:
                raise TooManySingularDrawsError(
                    f"{singular_run} consecutive singular elemental draws"
                )
            continue
        singular_run = 0

        improved = False
        while True:
            q = _objective(data, beta, alpha)
            if trace is not None:
                trace.append((beta, q))
            if _q_equal(q, best_q):
                if improved:
                    # concentration converged: adopt the refit (same
                    # objective, now an LS fit on its own kept set)
                    best_beta = beta
                break
            if q < best_q:
                best_q, best_beta = q, beta
                improved = True
                try:
                    bls = ls_fit(data, _kept_at(data, beta, alpha))
                except RankDeficientError:
                    break
                ls_calls += 1
                beta = bls
                continue
            break
        if not improved:
            failed_rounds += 1

    if cfg.final_polish and best_beta is not None:
        best_beta, best_q, used = _concentrate(data, best_beta, best_q, alpha, trace)
        ls_calls += used

    return _finish_lst_report(
        data, "lst-aa2", best_beta, alpha,
        ls_calls=ls_calls, pairs=0, subsets=subsets, seed=cfg.seed, t0=t0,
    )


# ---------------------------------------------------------------------------
# Brute-force oracle (independent of the kernel code paths)
# ---------------------------------------------------------------------------


def _oracle_batch_q(data: Dataset, betas: np.ndarray, alpha: float) -> np.ndarray:
    """Trimmed objective for a batch of coefficient vectors.

    Deliberately built on numpy median/sort only, independent of the
    kernels the estimators use.
    """
    R = data.response[None, :] - betas @ data.design.T
    med = np.median(R, axis=1)
    dev = np.abs(R - med[:, None])
    s = np.median(dev, axis=1)
    sigma = np.where(s == 0.0, 1.0, s)
    depths = dev / sigma[:, None]
    mask = depths <= alpha
    return np.einsum("ij,ij->i", R * R, mask.astype(np.float64))


def lst_oracle(data: Dataset, alpha, candidates=None) -> FitReport:
    """Grid minimizer of the trimmed objective for p <= 2 small instances.

    p=1 evaluates all responses, all pairwise midpoints and a dense
    2001-point grid over the response range; p=2 runs a coarse-to-fine grid
    (two 10x refinements) over a box of half-width 10x the LS residual
    scale around the LS fit.  An explicit ``candidates`` array (m x p)
    bypasses grid construction, which lets callers compare runs on matched
    candidate sets.
    """
    t0 = time.perf_counter()
    alpha = core._check_alpha(alpha)
    if data.p > 2:
        raise UnsupportedDimensionError("oracle supports p <= 2 only")
    if data.n > 30:
        raise ValueError("oracle is limited to n <= 30")

    if candidates is not None:
        cand = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
        if cand.shape[1] != data.p:
            raise ValueError("candidate rows must have length p")
        qs = _oracle_batch_q(data, cand, alpha)
        best = int(np.argmin(qs))
        beta = cand[best]
    elif data.p == 1:
        y = data.response
        mids = (y[:, None] + y[None, :]) / 2.0
        grid = np.linspace(y.min(), y.max(), 2001)
        cand = np.concatenate([y, mids[np.triu_indices(y.size, k=1)], grid])
        qs = _oracle_batch_q(data, cand[:, None], alpha)
        best = int(np.argmin(qs))
        beta = np.array([cand[best]])
    else:
        b_ls = ls_fit(data)
        r_ls = data.response - data.design @ b_ls
        scale = float(np.sqrt(r_ls @ r_ls / max(1, data.n - data.p)))
        scale = max(scale, 1e-8)
        center = b_ls
        hw = 10.0 * scale
        beta = None
        best_q = math.inf
        for _level in range(3):
            ax0 = np.linspace(center[0] - hw, center[0] + hw, 200)
            ax1 = np.linspace(center[1] - hw, center[1] + hw, 200)
            g0, g1 = np.meshgrid(ax0, ax1, indexing="ij")
            cand = np.column_stack([g0.ravel(), g1.ravel()])
            cand = np.vstack([center, cand])  # keep the exact center in play
            qs = _oracle_batch_q(data, cand, alpha)
            best = int(np.argmin(qs))
            if qs[best] < best_q:
                best_q = float(qs[best])
                beta = cand[best]
            center = beta
            hw /= 10.0

    q = float(_oracle_batch_q(data, beta[None, :], alpha)[0])
    st = core.trim_state(data, beta, alpha)
    return FitReport(
        method="lst-oracle",
        beta=beta,
        q=q,
        kept=st.kept,
        elapsed=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# LTS baseline
# ---------------------------------------------------------------------------


def _lts_objective(data: Dataset, beta, h: int):
    r = data.response - data.design @ beta
    idx = h_smallest(r * r, h)
    rh = r[idx]
    return float(rh @ rh), idx


def lts_fit(data: Dataset, cfg: Optional[LtsConfig] = None, trace=None) -> FitReport:
    """FAST-LTS style search for the least trimmed squares baseline.

    Random elemental starts, two concentration steps each (LS on the h
    smallest squared residuals), then the best finalists are iterated to
    convergence of the h-subset.
    """
    cfg = cfg or LtsConfig()
    t0 = time.perf_counter()
    if not core.design_rank_ok(data):
        raise DegenerateDesignError("design matrix is rank deficient")
    n, p = data.n, data.p
    h = cfg.h if cfg.h is not None else (n + p + 1) // 2
    if not n // 2 <= h <= n:
        raise ValueError(f"h={h} outside [floor(n/2), n] = [{n // 2}, {n}]")

    rng = np.random.default_rng(cfg.seed)
    W = data.design
    y = data.response
    ls_calls = 0
    subsets = 0
    starts = []
    singular_run = 0
    s = 0
    while s < cfg.n_starts:
        idx = rng.choice(n, size=p, replace=False)
        subsets += 1
        try:
            beta = np.linalg.solve(W[idx], y[idx])
        except np.linalg.LinAlgError:
            beta = None
        if beta is None or not np.isfinite(beta).all():
            singular_run += 1
            if singular_run > cfg.max_singular_redraws:
                raise TooManySingularDrawsError(
                    f"{singular_run} consecutive singular elemental draws"
                )
            continue
        singular_run = 0
        for _ in range(cfg.c_steps_initial):
            _obj, hset = _lts_objective(data, beta, h)
            try:
                beta = ls_fit(data, hset)
            except RankDeficientError:
                break
            ls_calls += 1
        obj, _hset = _lts_objective(data, beta, h)
        if trace is not None:
            trace.append((beta, obj))
        starts.append((obj, s, beta))
        s += 1

    starts.sort(key=lambda t: (t[0], t[1]))
    best_obj = math.inf
    best_beta = None
    for obj, _s, beta in starts[: cfg.n_finalists]:
        prev_key = None
        for _ in range(200):
            _obj, hset = _lts_objective(data, beta, h)
            key = hset.tobytes()
            if key == prev_key:
                break
            prev_key = key
            try:
                bnew = ls_fit(data, hset)
            except RankDeficientError:
                break
            ls_calls += 1
            if np.array_equal(bnew, beta):
                break
            beta = bnew
        obj, _hset = _lts_objective(data, beta, h)
        if trace is not None:
            trace.append((beta, obj))
        if obj < best_obj:
            best_obj, best_beta = obj, beta

    q, hset = _lts_objective(data, best_beta, h)
    return FitReport(
        method="lts",
        beta=best_beta,
        q=q,
        kept=hset,
        ls_calls=ls_calls,
        subsets_sampled=subsets,
        elapsed=time.perf_counter() - t0,
        seed=cfg.seed,
    )


def verify_fixed_point(data: Dataset, report: FitReport, alpha) -> bool:
    """True iff the LS fit on the report's kept set reproduces its beta.

    The trimmed-objective minimizer is exactly the LS fit on its own kept
    set, so a converged fit must satisfy this to within 1e-6 relative.
    """
    core._check_alpha(alpha)
    try:
        bls = ls_fit(data, report.kept)
    except RankDeficientError:
        return False
    diff = float(np.linalg.norm(bls - report.beta))
    return diff <= 1e-6 * max(1.0, float(np.linalg.norm(report.beta)))
