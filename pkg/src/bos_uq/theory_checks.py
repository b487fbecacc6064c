"""Small-scale brute-force and Monte-Carlo validators of the probabilistic ingredients."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .bos_design import DesignOperator, ExplicitBos, SubsampledFourier, sample_uniform_rows
from .classo import LassoConfig, lambda0, solve_classo

__all__ = [
    "RipReport",
    "rip_constant_bruteforce",
    "check_noise_event",
    "OracleReport",
    "check_oracle_inequalities",
    "bernstein_bound",
    "bernstein_check",
    "complex_noise",
]

MAX_P = 24
MAX_S = 6


def complex_noise(rng, sigma: float, size) -> np.ndarray:
    """``CN(0, sigma^2)``: real and imaginary parts i.i.d. ``N(0, sigma^2/2)``."""
    scale = sigma / math.sqrt(2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


@dataclass(frozen=True)
class RipReport:
    s: int
    delta_s: float
    argmax_support: tuple

    def to_dict(self):
        return asdict(self)


def rip_constant_bruteforce(A_dense, s: int) -> RipReport:
    """Exact ``delta_s`` by eigendecomposing every ``s``-column Gram submatrix.

    Columns are taken as given; scale by ``1/sqrt(n)`` beforehand for the
    normalized design.
    """
    A = np.asarray(A_dense, dtype=complex)
    p = A.shape[1]
    if p > MAX_P or s > MAX_S:
        raise ValueError(f"brute force limited to p <= {MAX_P} and s <= {MAX_S}")
    if not (1 <= s <= p):
        raise ValueError("need 1 <= s <= p")
    gram = A.conj().T @ A
    best, arg = -1.0, ()
    for S in itertools.combinations(range(p), s):
        sub = gram[np.ix_(S, S)]
        ev = np.linalg.eigvalsh(sub)
        dev = max(abs(ev[0] - 1.0), abs(ev[-1] - 1.0))
        if dev > best:
            best, arg = dev, S
    return RipReport(s, float(best), tuple(int(i) for i in arg))


def check_noise_event(op: DesignOperator, sigma: float, trials: int, seed,
                      lambda_scale: float = 1.0) -> float:
    """Frequency of ``max_j (2/n)|<noise, X_j>| <= lambda_scale * lambda0``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    lam = lambda_scale * lambda0(sigma, op.K, op.n, op.p)
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(trials):
        eps = complex_noise(rng, sigma, op.n)
        stat = 2.0 / op.n * np.abs(op.adjoint(eps)).max()
        hits += stat <= lam
    return float(hits / trials)


@dataclass
class OracleReport:
    trials: int
    certified: int
    event_held: int
    l1_violations: int
    l2_violations: int
    max_l1_ratio: float
    max_l2_ratio: float

    @property
    def violations(self) -> int:
        return self.l1_violations + self.l2_violations

    def to_dict(self):
        d = asdict(self)
        d["violations"] = self.violations
        return d


def check_oracle_inequalities(p: int = 16, n: int = 12, s0: int = 1, sigma: float = 0.05,
                              certified_trials: int = 200, seed=0, lambda_factor: float = 2.0,
                              max_attempts: Optional[int] = None) -> OracleReport:
    """Monte-Carlo check of the l1 and l2 LASSO oracle bounds.

    Each attempt draws a subsampled Fourier design without replacement, an
    ``s0``-sparse unit-norm truth and noise, and solves with
    ``lam = lambda_factor * lambda0``. A trial counts when the noise event
    holds and the brute-force RIP constant of ``X/sqrt(n)`` at the order of
    the actual error support ``supp(beta_hat) U S0`` is below 1; only then
    are the bounds ``4 lam s0/(1-delta)`` and
    ``sqrt(640) sigma sqrt(K s0 ln p / n)/(1-delta)`` asserted.
    """
    rng = np.random.default_rng(seed)
    max_attempts = max_attempts or 20 * certified_trials
    lam0 = lambda0(sigma, 1.0, n, p)
    lam = lambda_factor * lam0
    cfg = LassoConfig(lam=lam, rel_tol=1e-12, dual_gap_tol=1e-14, max_iters=200_000)
    attempts = certified = held = v1 = v2 = 0
    r1 = r2 = 0.0
    delta_cache = {}
    while certified < certified_trials and attempts < max_attempts:
        attempts += 1
        op = SubsampledFourier(sample_uniform_rows(p, n, False, rng))
        beta0 = np.zeros(p, dtype=complex)
        S0 = rng.choice(p, s0, replace=False)
        beta0[S0] = complex_noise(rng, math.sqrt(2.0), s0)
        if s0:
            beta0 /= np.linalg.norm(beta0)
        eps = complex_noise(rng, sigma, n)
        if 2.0 / n * np.abs(op.adjoint(eps)).max() > lam0:
            continue
        held += 1
        sol = solve_classo(op, op.forward(beta0) + eps, cfg)
        err = sol.beta_hat - beta0
        support = np.union1d(np.flatnonzero(sol.beta_hat), S0)
        t = max(int(support.size), 1)
        if t > MAX_S:
            continue
        key = (tuple(op.pattern.indices.tolist()), t)
        if key not in delta_cache:
            A = op.to_dense() / math.sqrt(n)
            delta_cache[key] = rip_constant_bruteforce(A, t).delta_s
        delta = delta_cache[key]
        if delta >= 1:
            continue
        certified += 1
        b1 = 4.0 * lam * s0 / (1.0 - delta)
        b2 = math.sqrt(640.0) * sigma / (1.0 - delta) * math.sqrt(s0 * math.log(p) / n)
        e1, e2 = np.abs(err).sum(), np.linalg.norm(err)
        # tiny slack for solver round-off
        v1 += e1 > b1 * (1 + 1e-9) + 1e-12
        v2 += e2 > b2 * (1 + 1e-9) + 1e-12
        if b1 > 0:
            r1 = max(r1, e1 / b1)
        if b2 > 0:
            r2 = max(r2, e2 / b2)
    return OracleReport(attempts, certified, held, int(v1), int(v2), float(r1), float(r2))


def bernstein_bound(bound_K: float, variance_sum: float, t: float) -> float:
    return 2.0 * math.exp(-(t * t / 2.0) / (variance_sum + bound_K * t / 3.0)) if t > 0 else 2.0


def bernstein_check(bound_K: float, variances, t: float, trials: int, seed):
    """Empirical ``P(|sum Z_i| >= t)`` for symmetric two-point ``Z_i = +-sqrt(var_i)``.

    Returns ``(empirical_tail, bound)``.
    """
    variances = np.asarray(variances, dtype=float)
    amps = np.sqrt(variances)
    if np.any(amps > bound_K * (1 + 1e-12)):
        raise ValueError("two-point variables would exceed the bound K")
    rng = np.random.default_rng(seed)
    hits = 0
    chunk = 10_000
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        signs = rng.integers(0, 2, size=(m, amps.size)) * 2 - 1
        sums = signs @ amps
        hits += int(np.sum(np.abs(sums) >= t))
        done += m
    return hits / trials, bernstein_bound(bound_K, float(variances.sum()), t)
