"""Monte-Carlo harness: data generators, contamination, EMSE and the
replication benchmark.

Every replication derives its own seeds by hashing (master_seed, rep,
stream) through numpy's SeedSequence, so results are reproducible bitwise
regardless of execution order or worker count (timing fields excepted).
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace, field
from typing import Callable, Optional

import numpy as np

from . import diagnostics, estimators
from .core import Dataset

__all__ = [
    "Scenario",
    "BenchTable",
    "MethodResult",
    "gen_clean_gaussian",
    "gen_correlated",
    "contaminate",
    "emse",
    "empirical_variance_mode",
    "run_benchmark",
]

KINDS = ("clean-gaussian", "correlated", "correlated-contaminated")
DEFAULT_METHODS = ("ls", "lst-aa1", "lst-aa2", "lts")


def gen_clean_gaussian(n: int, p: int, seed) -> Dataset:
    """n i.i.d. standard normal rows (carriers and response); true beta = 0."""
    if n <= p:
        raise ValueError("need n > p")
    rng = np.random.default_rng(seed)
    carriers = rng.standard_normal((n, p - 1))
    response = rng.standard_normal(n)
    return Dataset(carriers, response)


def gen_correlated(n: int, p: int, rho: float, seed) -> Dataset:
    """Rows (x, y) ~ N(0, S) with S = (1 - rho) I + rho 11' over all p coordinates."""
    if n <= p:
        raise ValueError("need n > p")
    rho = float(rho)
    if p > 1 and not -1.0 / (p - 1) < rho < 1.0:
        raise ValueError(f"rho={rho} outside (-1/(p-1), 1) for p={p}")
    rng = np.random.default_rng(seed)
    sigma = (1.0 - rho) * np.eye(p) + rho * np.ones((p, p))
    L = np.linalg.cholesky(sigma)
    rows = rng.standard_normal((n, p)) @ L.T
    return Dataset(rows[:, : p - 1], rows[:, p - 1])


def _contam_count(eps: float, n: int) -> int:
    # ceil(eps * n) with a tiny slack so float artifacts (0.1 * 200 ->
    # 20.000000000000004) do not inflate the count
    return int(math.ceil(eps * n - 1e-9)) if eps > 0 else 0


def contaminate(data: Dataset, eps: float, seed) -> Dataset:
    """Replace ceil(eps * n) random rows with draws from N(mu_c, 0.1 I).

    mu_c is (7, ..., 7, -2): leveraged carriers with a response that breaks
    the clean pattern.  Rows are selected without replacement.
    """
    eps = float(eps)
    if not 0.0 <= eps < 0.5:
        raise ValueError(f"eps must be in [0, 0.5), got {eps}")
    m = _contam_count(eps, data.n)
    if m == 0:
        return data
    rng = np.random.default_rng(seed)
    idx = rng.choice(data.n, size=m, replace=False)
    mu = np.full(data.p, 7.0)
    mu[-1] = -2.0
    rows = mu + math.sqrt(0.1) * rng.standard_normal((m, data.p))
    carriers = data.carriers.copy()
    response = data.response.copy()
    carriers[idx] = rows[:, : data.p - 1]
    response[idx] = rows[:, data.p - 1]
    return Dataset(carriers, response)


def emse(estimates, beta0) -> float:
    """Empirical mean squared error: sum ||T_i - beta0||^2 / R."""
    if len(estimates) == 0:
        raise ValueError("emse of an empty estimate list")
    B = np.asarray(estimates, dtype=np.float64)
    beta0 = np.asarray(beta0, dtype=np.float64)
    if B.ndim != 2 or B.shape[1] != beta0.shape[0]:
        raise ValueError("estimate/beta0 dimension mismatch")
    D = B - beta0
    return float(np.einsum("ij,ij->", D, D) / B.shape[0])


def empirical_variance_mode(estimates) -> float:
    """EMSE against the estimates' own sample mean (real-data protocol)."""
    if len(estimates) < 2:
        raise ValueError("need at least two estimates")
    B = np.asarray(estimates, dtype=np.float64)
    return emse(B, B.mean(axis=0))


@dataclass(frozen=True)
class Scenario:
    """One benchmark configuration.

    ``alpha=None`` resolves to 1 for clean scenarios and 3 when there is
    contamination.  ``eps`` is the contamination fraction (rows replaced).
    """

    kind: str
    n: int
    p: int
    reps: int
    master_seed: int = 0
    rho: float = 0.9
    eps: float = 0.0
    alpha: Optional[float] = None
    methods: tuple = DEFAULT_METHODS

    def resolved_alpha(self) -> float:
        if self.alpha is not None:
            return float(self.alpha)
        return 3.0 if self.contaminated else 1.0

    @property
    def contaminated(self) -> bool:
        return self.kind == "correlated-contaminated" or self.eps > 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "p": self.p,
            "reps": self.reps,
            "master_seed": self.master_seed,
            "rho": self.rho,
            "eps": self.eps,
            "alpha": self.resolved_alpha(),
            "methods": list(self.methods),
        }


def _validate_scenario(sc: Scenario):
    if sc.kind not in KINDS:
        raise ValueError(f"unknown scenario kind {sc.kind!r}")
    if sc.n <= sc.p or sc.p < 1 or sc.reps < 1:
        raise ValueError("need n > p >= 1 and reps >= 1")
    if not 0.0 <= sc.eps < 0.5:
        raise ValueError(f"eps must be in [0, 0.5), got {sc.eps}")
    if sc.kind == "correlated-contaminated" and sc.eps == 0.0:
        raise ValueError("correlated-contaminated scenario needs eps > 0")
    unknown = [m for m in sc.methods if m not in ("ls", "lst-aa1", "lst-aa2", "lts", "lst-oracle")]
    if unknown:
        raise ValueError(f"unknown methods {unknown}")
    if "lst-oracle" in sc.methods and (sc.n > 30 or sc.p > 2):
        raise ValueError("lst-oracle requires n <= 30 and p <= 2")
    if sc.eps > 0 and sc.n > 2 * sc.p + 1:
        frac = _contam_count(sc.eps, sc.n) / sc.n
        if frac >= float(diagnostics.rbp(sc.n, sc.p)):
            warnings.warn(
                f"contamination fraction {frac:.3f} is at or above the "
                f"breakdown point {float(diagnostics.rbp(sc.n, sc.p)):.3f}; "
                "robustness claims are not meaningful",
                stacklevel=2,
            )


def _seed_for(master_seed: int, rep: int, stream: int) -> int:
    ss = np.random.SeedSequence([int(master_seed), int(rep), int(stream)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _default_generate(sc: Scenario, rep: int) -> Dataset:
    gen_seed = _seed_for(sc.master_seed, rep, 0)
    if sc.kind == "clean-gaussian":
        data = gen_clean_gaussian(sc.n, sc.p, gen_seed)
    else:
        data = gen_correlated(sc.n, sc.p, sc.rho, gen_seed)
    if sc.contaminated and sc.eps > 0:
        data = contaminate(data, sc.eps, _seed_for(sc.master_seed, rep, 1))
    return data


def _configs_for(sc: Scenario, overrides) -> dict:
    alpha = sc.resolved_alpha()
    cfg = {
        "lst-aa1": estimators.Aa1Config(alpha=alpha),
        "lst-aa2": estimators.Aa2Config(alpha=alpha),
        "lts": estimators.LtsConfig(),
        "ls": None,
        "lst-oracle": alpha,
    }
    if overrides:
        cfg.update(overrides)
    return cfg


def _run_rep(sc: Scenario, rep: int, configs: dict, generator) -> dict:
    data = generator(sc, rep) if generator is not None else _default_generate(sc, rep)
    out = {}
    for k, method in enumerate(sc.methods):
        cfg = configs[method]
        if hasattr(cfg, "seed"):
            cfg = replace(cfg, seed=_seed_for(sc.master_seed, rep, 2 + k))
        try:
            report = diagnostics.fit_by_tag(data, method, cfg)
            out[method] = (report.beta.tolist(), report.elapsed, None)
        except Exception as e:  # recorded per replication, excluded from EMSE
            out[method] = (None, 0.0, f"{type(e).__name__}: {e}")
    return out


def _rep_task(args):
    return _run_rep(*args)


@dataclass
class MethodResult:
    emse: float
    total_elapsed: float
    n_used: int
    n_failed: int


@dataclass
class BenchTable:
    """Per-estimator (EMSE, total time) results for one scenario."""

    scenario: dict
    results: dict
    rep_seeds: list
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema": "lst-regress/1",
            "kind": "bench-table",
            "scenario": self.scenario,
            "results": {
                m: {
                    "emse": r.emse,
                    "total_elapsed_s": r.total_elapsed,
                    "n_used": r.n_used,
                    "n_failed": r.n_failed,
                }
                for m, r in self.results.items()
            },
            "rep_seeds": self.rep_seeds,
            "failures": self.failures,
        }

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def render_text(self) -> str:
        sc = self.scenario
        lines = [
            "scenario: {kind}  n={n} p={p} eps={eps} alpha={alpha} reps={reps} seed={master_seed}".format(**sc),
            "table entries are (emse, total time in seconds)",
        ]
        width = max(len(m) for m in self.results) + 2
        for m, r in self.results.items():
            cell = f"({r.emse:.4f}, {r.total_elapsed:.4g})"
            if r.n_failed:
                cell += f"  [{r.n_failed} failed]"
            lines.append(f"{m:<{width}}{cell}")
        return "\n".join(lines)


def run_benchmark(scenario: Scenario, *, configs=None, workers: int = 1,
                  generator: Optional[Callable] = None) -> BenchTable:
    """Run the replication benchmark for one scenario.

    Per-replication seeds are derived from (master_seed, rep), so the table
    (timing aside) is a pure function of the scenario: replications may run
    in any order or in ``workers`` parallel processes with identical
    results.  ``generator(scenario, rep) -> Dataset`` overrides the data
    source; ``configs`` overrides per-method estimator configs.
    """
    _validate_scenario(scenario)
    cfgs = _configs_for(scenario, configs)
    tasks = [(scenario, r, cfgs, generator) for r in range(scenario.reps)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rep_results = list(pool.map(_rep_task, tasks, chunksize=1))
    else:
        rep_results = [_rep_task(t) for t in tasks]

    beta0 = np.zeros(scenario.p)
    results = {}
    failures = []
    for method in scenario.methods:
        betas = []
        elapsed = 0.0
        failed = 0
        for r, rep in enumerate(rep_results):
            beta, dt, err = rep[method]
            elapsed += dt
            if err is None:
                betas.append(beta)
            else:
                failed += 1
                failures.append({"rep": r, "method": method, "error": err})
        results[method] = MethodResult(
            emse=emse(betas, beta0) if betas else float("nan"),
            total_elapsed=elapsed,
            n_used=len(betas),
            n_failed=failed,
        )
    rep_seeds = [_seed_for(scenario.master_seed, r, 0) for r in range(scenario.reps)]
    return BenchTable(
        scenario=scenario.to_dict(),
        results=results,
        rep_seeds=rep_seeds,
        failures=failures,
    )
