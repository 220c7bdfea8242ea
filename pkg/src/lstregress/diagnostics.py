"""Robustness diagnostics: breakdown point, contamination probes, influence
function, equivariance transforms and asymptotic-variance constants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import core, estimators
from .core import Dataset, SingularMatrixError

__all__ = [
    "ContaminationPoint",
    "AsymptoticConstants",
    "rbp",
    "influence_function",
    "empirical_if",
    "breakdown_probe",
    "shift_response",
    "scale_response",
    "affine_carriers",
    "asymptotic_variance",
    "std_normal_cdf",
    "std_normal_quantile",
]


@dataclass(frozen=True)
class ContaminationPoint:
    """A single contamination location z0 = (s0, t0)."""

    s0: np.ndarray
    t0: float

    def __post_init__(self):
        s0 = np.asarray(self.s0, dtype=np.float64).ravel()
        if not np.isfinite(s0).all() or not math.isfinite(self.t0):
            raise ValueError("contamination point must be finite")
        object.__setattr__(self, "s0", s0)
        object.__setattr__(self, "t0", float(self.t0))


def rbp(n: int, p: int) -> Fraction:
    """Finite-sample replacement breakdown point of the trimmed-LS fit.

    For data in general position: floor((n+1)/2)/n when p == 1, else
    (floor(n/2) - p + 2)/n.  Requires n > 2p + 1.
    """
    n = int(n)
    p = int(p)
    if p < 1 or n <= 2 * p + 1:
        raise ValueError(f"need p >= 1 and n > 2p + 1, got n={n}, p={p}")
    if p == 1:
        return Fraction((n + 1) // 2, n)
    return Fraction(n // 2 - p + 2, n)


def influence_function(z0: ContaminationPoint, beta, m, sigma, alpha, M) -> np.ndarray:
    """First-order effect of point-mass contamination at z0 on the fit.

    Zero (bitwise) when the residual of z0 at ``beta`` falls outside the
    kept band ``[m - alpha*sigma, m + alpha*sigma]``; otherwise
    ``r0 * M^{-1} (1, s0)``.
    """
    alpha = core._check_alpha(alpha)
    sigma = float(sigma)
    m = float(m)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    M = np.asarray(M, dtype=np.float64)
    p = M.shape[0]
    if M.shape != (p, p):
        raise ValueError("M must be a square matrix")
    beta = core.as_beta(beta, p)
    if z0.s0.shape[0] != p - 1:
        raise ValueError(f"s0 has length {z0.s0.shape[0]}, expected {p - 1}")
    v = np.concatenate([[1.0], z0.s0])
    r0 = z0.t0 - v @ beta
    if not (m - alpha * sigma <= r0 <= m + alpha * sigma):
        return np.zeros(p)
    try:
        out = np.linalg.solve(M, v)
    except np.linalg.LinAlgError as e:
        raise SingularMatrixError(str(e)) from e
    if not np.isfinite(out).all():
        raise SingularMatrixError("M is numerically singular")
    return r0 * out


def empirical_if(data: Dataset, alpha, z0: ContaminationPoint,
                 fit: estimators.FitReport) -> np.ndarray:
    """Plug-in influence estimate using the fit's own trim state.

    m and sigma come from the trim state at ``fit.beta``; the second-moment
    matrix is averaged over the kept rows with 1/n normalization,
    M = (1/n) sum_{i in kept} w_i w_i'.
    """
    st = core.trim_state(data, fit.beta, alpha)
    Wk = data.design[st.kept]
    M = (Wk.T @ Wk) / data.n
    return influence_function(z0, fit.beta, st.m, st.sigma, alpha, M)


_FITTERS = {
    "ls": lambda data, cfg: estimators.ls_report(data),
    "lst-aa1": lambda data, cfg: estimators.lst_fit_aa1(data, cfg),
    "lst-aa2": lambda data, cfg: estimators.lst_fit_aa2(data, cfg),
    "lts": lambda data, cfg: estimators.lts_fit(data, cfg),
    "lst-oracle": lambda data, cfg: estimators.lst_oracle(
        data, cfg if cfg is not None else 1.0
    ),
}


def fit_by_tag(data: Dataset, method: str, config=None) -> estimators.FitReport:
    """Dispatch a fit by method tag ('ls', 'lst-aa1', 'lst-aa2', 'lts', 'lst-oracle')."""
    try:
        fitter = _FITTERS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}") from None
    return fitter(data, config)


def breakdown_probe(data: Dataset, method: str, m_contam: int, magnitudes,
                    config=None, direction=None, leverage_carriers: bool = True):
    """Deviation of the refit under replacement contamination of growing size.

    For each magnitude M the first ``m_contam`` rows are replaced with the
    point ``(x, y) = (M * direction, -M)`` (leveraged carriers; default
    direction is the all-ones vector).  With ``leverage_carriers=False``
    the carriers stay at ``direction`` and only the response grows, a
    vertical-outlier probe that drives non-robust fits without bound.

    Returns a list of ``(magnitude, ||beta_contaminated - beta_clean||)``.
    """
    m_contam = int(m_contam)
    if not 0 <= m_contam < data.n:
        raise ValueError("m_contam must be in [0, n)")
    mags = [float(M) for M in magnitudes]
    if any(M <= 0 for M in mags) or sorted(mags) != mags:
        raise ValueError("magnitudes must be positive and ascending")
    if direction is None:
        direction = np.ones(data.p - 1)
    direction = np.asarray(direction, dtype=np.float64)
    if direction.shape != (data.p - 1,):
        raise ValueError("direction must have length p - 1")

    beta_clean = fit_by_tag(data, method, config).beta
    curve = []
    for M in mags:
        carriers = data.carriers.copy()
        response = data.response.copy()
        if m_contam:
            carriers[:m_contam] = (M * direction) if leverage_carriers else direction
            response[:m_contam] = -M
        contaminated = Dataset(carriers, response)
        beta_c = fit_by_tag(contaminated, method, config).beta
        curve.append((M, float(np.linalg.norm(beta_c - beta_clean))))
    return curve


# ---------------------------------------------------------------------------
# Equivariance transforms
# ---------------------------------------------------------------------------


def shift_response(data: Dataset, b) -> Dataset:
    """y_i -> y_i + (1, x_i) . b; the fit shifts by b."""
    b = core.as_beta(b, data.p)
    return Dataset(data.carriers, data.response + data.design @ b)


def scale_response(data: Dataset, s: float) -> Dataset:
    """y_i -> s * y_i; the fit scales by s."""
    return Dataset(data.carriers, float(s) * data.response)


def affine_carriers(data: Dataset, A) -> Dataset:
    """Design rows w_i -> A' w_i; the fit maps by A^{-1}.

    A must be nonsingular and must fix the intercept coordinate (first
    column equal to the first unit vector) so transformed design rows keep
    their leading 1.
    """
    A = np.asarray(A, dtype=np.float64)
    p = data.p
    if A.shape != (p, p):
        raise ValueError(f"A must be {p} x {p}")
    e1 = np.zeros(p)
    e1[0] = 1.0
    if not np.array_equal(A[:, 0], e1):
        raise ValueError("A must fix the intercept coordinate (first column = e1)")
    if abs(np.linalg.det(A)) == 0.0:
        raise SingularMatrixError("A is singular")
    new_design = data.design @ A
    return Dataset(new_design[:, 1:], data.response)


# ---------------------------------------------------------------------------
# Asymptotic variance constants
# ---------------------------------------------------------------------------


def std_normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def std_normal_quantile(q: float) -> float:
    """Inverse standard normal CDF by bisection to 1e-12."""
    if not 0.0 < q < 1.0:
        raise ValueError("quantile argument must be in (0, 1)")
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if std_normal_cdf(mid) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class AsymptoticConstants:
    """Constants of the limiting normal law of the trimmed-LS fit.

    For standard spherical carriers and N(0, sigma^2) errors, sqrt(n) times
    the estimation error tends to a centered normal with per-coordinate
    variance ``avar = 2 C sigma^2 / C1^2``, where ``c = sigma * z_{3/4}``,
    ``C`` is the Gamma(1/2, rate 1) CDF at ``alpha c / sigma`` and
    ``C1 = 2 Phi(alpha c / sigma) - 1``.
    """

    c: float
    C: float
    C1: float
    avar: float


def asymptotic_variance(alpha, sigma: float = 1.0) -> AsymptoticConstants:
    alpha = core._check_alpha(alpha)
    sigma = float(sigma)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    z34 = std_normal_quantile(0.75)
    c = sigma * z34
    x = alpha * c / sigma
    C = math.erf(math.sqrt(x))  # Gamma(1/2, rate 1) CDF
    C1 = 2.0 * std_normal_cdf(x) - 1.0
    avar = 2.0 * C * sigma * sigma / (C1 * C1)
    return AsymptoticConstants(c=c, C=C, C1=C1, avar=avar)
