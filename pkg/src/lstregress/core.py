"""Data containers, robust location/scale, depth trimming and the trimmed
objective shared by every estimator.

A residual's depth (outlyingness) at a candidate coefficient vector is its
absolute deviation from the residual median in units of the residual MAD.
The trimmed objective sums the squares of the residuals whose depth does
not exceed the trimming constant ``alpha``; the regression estimator built
on top of it minimizes that sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k

__all__ = [
    "Dataset",
    "TrimState",
    "ObjectiveValue",
    "RankDeficientError",
    "DegenerateDesignError",
    "TooManySingularDrawsError",
    "NoValidPairsError",
    "UnsupportedDimensionError",
    "SingularMatrixError",
    "compute_residuals",
    "median",
    "mad",
    "trim_state",
    "objective_q",
    "region_signature",
    "design_rank_ok",
]


class RankDeficientError(ValueError):
    """Least-squares design (or selected subset) has numerical rank < p."""


class DegenerateDesignError(ValueError):
    """Full design matrix is rank deficient; randomized fits cannot run."""


class TooManySingularDrawsError(RuntimeError):
    """Consecutive elemental draws were all singular."""


class NoValidPairsError(RuntimeError):
    """No carrier-distinct index pair could be formed."""


class UnsupportedDimensionError(ValueError):
    """Operation only supports small model dimensions."""


class SingularMatrixError(ValueError):
    """A matrix required to be invertible is singular."""


def _readonly(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


class Dataset:
    """n observations of a carrier row and a scalar response.

    ``carriers`` has shape (n, p-1); the implicit design row is
    ``(1, carriers[i])``.  ``p == 1`` (intercept-only model) is the
    degenerate case of zero-width carriers.  Instances are immutable and
    safe to share across threads.
    """

    __slots__ = ("carriers", "response", "design")

    def __init__(self, carriers, response):
        carriers = np.asarray(carriers, dtype=np.float64)
        response = np.asarray(response, dtype=np.float64)
        if carriers.ndim == 1:
            carriers = carriers[:, None]
        if carriers.ndim != 2:
            raise ValueError("carriers must be a 2-d array")
        if response.ndim != 1:
            raise ValueError("response must be a 1-d vector")
        n = response.shape[0]
        if n < 1:
            raise ValueError("need at least one observation")
        if carriers.shape[0] != n:
            raise ValueError(
                f"carriers have {carriers.shape[0]} rows but response has {n}"
            )
        if carriers.size and not np.isfinite(carriers).all():
            raise ValueError("carriers contain non-finite entries")
        if not np.isfinite(response).all():
            raise ValueError("response contains non-finite entries")
        self.carriers = _readonly(carriers)
        self.response = _readonly(response)
        self.design = _readonly(np.column_stack([np.ones(n), carriers]))

    @classmethod
    def intercept_only(cls, response):
        response = np.asarray(response, dtype=np.float64)
        return cls(np.empty((response.shape[0], 0)), response)

    @property
    def n(self) -> int:
        return self.response.shape[0]

    @property
    def p(self) -> int:
        return self.carriers.shape[1] + 1

    def __repr__(self):
        return f"Dataset(n={self.n}, p={self.p})"


def as_beta(beta, p):
    """Validate and convert a coefficient vector (length p, finite)."""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.ndim == 0:
        beta = beta[None]
    if beta.shape != (p,):
        raise ValueError(f"coefficient vector has shape {beta.shape}, expected ({p},)")
    if not np.isfinite(beta).all():
        raise ValueError("coefficient vector contains non-finite entries")
    return beta


@dataclass(frozen=True)
class TrimState:
    """Per-coefficient snapshot of the trim computation.

    ``kept`` holds the ascending indices whose depth is <= the ``alpha``
    used to build the state.  ``sigma`` is 1.0 with ``sigma_degenerate``
    set when the residual MAD vanishes (a majority of identical residuals).
    """

    residuals: np.ndarray
    m: float
    sigma: float
    sigma_degenerate: bool
    depths: np.ndarray
    kept: np.ndarray
    alpha: float


@dataclass(frozen=True)
class ObjectiveValue:
    q: float
    kept_count: int


def compute_residuals(data: Dataset, beta) -> np.ndarray:
    """Residuals y_i - (1, x_i) . beta."""
    beta = as_beta(beta, data.p)
    return data.response - data.design @ beta


def median(v) -> float:
    """Middle order statistic; mean of the two central ones for even length."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("median of an empty vector")
    if not np.isfinite(v).all():
        raise ValueError("median of non-finite values")
    return float(_k.median(v))


def mad(v) -> float:
    """Median of absolute deviations from the median (no consistency factor)."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("MAD of an empty vector")
    if not np.isfinite(v).all():
        raise ValueError("MAD of non-finite values")
    return float(_k.mad(v))


def _check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not alpha >= 1.0:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    return alpha


def trim_state(data: Dataset, beta, alpha) -> TrimState:
    """Residual median/MAD, depths and kept index set at ``beta``.

    When the residual MAD is zero (at least ``floor((n+1)/2)`` identical
    residuals) the scale is set to 1.0 so depths stay finite.
    """
    alpha = _check_alpha(alpha)
    r = compute_residuals(data, beta)
    m, sigma, degen, depths, kept_mask, _q, _kc = _k.trim_stats(r, alpha)
    kept = np.flatnonzero(kept_mask)
    r.flags.writeable = False
    depths.flags.writeable = False
    kept.flags.writeable = False
    return TrimState(
        residuals=r,
        m=m,
        sigma=sigma,
        sigma_degenerate=degen,
        depths=depths,
        kept=kept,
        alpha=alpha,
    )


def objective_q(data: Dataset, beta, alpha) -> ObjectiveValue:
    """Sum of squared residuals whose depth is <= alpha."""
    alpha = _check_alpha(alpha)
    r = compute_residuals(data, beta)
    _m, _s, _d, _depths, _mask, q, kept_count = _k.trim_stats(r, alpha)
    return ObjectiveValue(q=q, kept_count=kept_count)


#: Relative gap below which two depths are considered tied.
TIE_RTOL = 1e-12


def region_signature(state: TrimState, tie_rtol: float = TIE_RTOL):
    """Kept indices ordered by strictly increasing depth, or None on a tie.

    Two depths tie when their gap is within ``tie_rtol * max(1, d_i, d_j)``;
    a tie means ``state`` sits on a region boundary of the objective and no
    strict ordering exists.
    """
    kept = state.kept
    d = state.depths[kept]
    order = np.argsort(d, kind="stable")
    ds = d[order]
    if ds.size >= 2:
        # ds is ascending, so max(1, ds[i], ds[i+1]) = max(1, ds[i+1])
        if bool((np.diff(ds) <= tie_rtol * np.maximum(1.0, ds[1:])).any()):
            return None
    return tuple(int(kept[o]) for o in order)


def design_rank_ok(data: Dataset) -> bool:
    """True iff the n x p design (with intercept column) has full rank p."""
    return int(np.linalg.matrix_rank(data.design)) == data.p
