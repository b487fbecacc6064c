"""Complex LASSO: fast solver, dense reference oracle, lambda rules, CV and noise estimation.

The objective throughout is ``(1/2n) ||X beta - y||^2 + lam * sum_j |beta_j|``
with complex ``beta``; the penalty is a group-lasso over (Re, Im) pairs, so
its prox is magnitude soft-thresholding.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .bos_design import DesignOperator, ExplicitBos

__all__ = [
    "LassoConfig",
    "LassoSolution",
    "NoiseEstimate",
    "OracleFailure",
    "NonConvergenceError",
    "lambda0",
    "lambda0_preconditioned",
    "prox_complex_l1",
    "objective",
    "duality_gap",
    "solve_classo",
    "solve_classo_reference",
    "cross_validate_lambda",
    "cv_fold_partition",
    "default_lambda_bar",
    "estimate_noise_scaled_lasso",
]


class OracleFailure(RuntimeError):
    """The reference solver did not reach its duality-gap tolerance."""


class NonConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class LassoConfig:
    lam: float
    max_iters: int = 5000
    rel_tol: float = 1e-8
    dual_gap_tol: Optional[float] = None
    step_rule: str = "backtracking"  # or "fixed"
    record_history: bool = False
    gap_every: int = 10

    def __post_init__(self):
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ValueError("lambda must be finite and >= 0")
        if self.rel_tol <= 0 or (self.dual_gap_tol is not None and self.dual_gap_tol <= 0):
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.step_rule not in ("backtracking", "fixed"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")


@dataclass
class LassoSolution:
    beta_hat: np.ndarray
    residual: np.ndarray
    lam: float
    iterations: int
    converged: bool
    final_gap: Optional[float] = None
    objective: float = float("nan")
    history: list = field(default_factory=list)

    def diagnostics(self) -> list:
        """Per-iteration records ``{"iteration", "objective", "gap"}`` (JSON-ready)."""
        return [dict(r) for r in self.history]


@dataclass(frozen=True)
class NoiseEstimate:
    sigma_hat: float
    iterations: int
    converged: bool = True
    degenerate: bool = False


def lambda0(sigma: float, K: float, n: int, p: int) -> float:
    """``sigma sqrt(K) (2 + sqrt(10 ln p)) / sqrt(n)``."""
    _check_lambda_args(sigma, n, p)
    if K < 1:
        raise ValueError("K must be >= 1")
    return sigma * math.sqrt(K) * (2.0 + math.sqrt(10.0 * math.log(p))) / math.sqrt(n)


def lambda0_preconditioned(sigma: float, kappa_norm: float, n: int, p: float) -> float:
    """``sigma ||kappa||^(3/2) (sqrt 2 + sqrt(10 ln p)) / (3 sqrt(pi) sqrt(n))``."""
    _check_lambda_args(sigma, n, p)
    if kappa_norm <= 0:
        raise ValueError("kappa_norm must be positive")
    return (sigma * kappa_norm ** 1.5 * (math.sqrt(2.0) + math.sqrt(10.0 * math.log(p)))
            / (3.0 * math.sqrt(math.pi) * math.sqrt(n)))


def _check_lambda_args(sigma, n, p):
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    if p < 2:
        raise ValueError("p must be >= 2")


def prox_complex_l1(z, threshold: float) -> np.ndarray:
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    z = np.asarray(z, dtype=complex)
    mag = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > threshold, 1.0 - threshold / mag, 0.0)
    return z * scale


def objective(op_or_matrix, y, beta, lam) -> float:
    r = _fwd(op_or_matrix, beta) - y
    n = y.shape[0]
    return float(np.vdot(r, r).real / (2 * n) + lam * np.abs(beta).sum())


def _fwd(op, beta):
    return op @ beta if isinstance(op, np.ndarray) else op.forward(beta)


def _adj(op, v):
    return op.conj().T @ v if isinstance(op, np.ndarray) else op.adjoint(v)


def _gap_from_residual(r, corr, y, beta, lam, n):
    """Fenchel gap given residual ``r = y - X beta`` and ``corr = X^* r``."""
    primal = np.vdot(r, r).real / (2 * n) + lam * np.abs(beta).sum()
    m = np.abs(corr).max(initial=0.0) / n
    s = 1.0 if m <= lam else lam / m
    theta = s * r
    yt = y - theta
    dual = (np.vdot(y, y).real - np.vdot(yt, yt).real) / (2 * n)
    return float(primal - dual)


def duality_gap(op_or_matrix, y, beta, lam) -> float:
    y = np.asarray(y, dtype=complex)
    r = y - _fwd(op_or_matrix, beta)
    return _gap_from_residual(r, _adj(op_or_matrix, r), y, beta, lam, y.shape[0])


def _power_sq_norm(op: DesignOperator, iters: int = 20, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.p) + 1j * rng.standard_normal(op.p)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = op.adjoint(op.forward(v))
        est = np.linalg.norm(w)
        if est == 0:
            return 0.0
        v = w / est
    return float(est)


def _validate(op, y):
    y = np.asarray(y, dtype=complex)
    if y.shape != (op.n,):
        raise ValueError(f"y must have length n={op.n}")
    if not np.all(np.isfinite(y)):
        raise ValueError("y contains non-finite entries")
    return y


def solve_classo(op: DesignOperator, y, cfg: LassoConfig, beta0=None) -> LassoSolution:
    """Accelerated proximal gradient with a monotone restart safeguard.

    A step whose objective exceeds the current one resets the momentum and is
    retaken from the current iterate, so the accepted objective sequence is
    non-increasing.
    """
    y = _validate(op, y)
    n, lam = op.n, cfg.lam

    sq = op.sq_norm()
    exact = sq is not None
    if sq is None:
        sq = _power_sq_norm(op)
    L = max(sq / n, 1e-12)
    if not exact and cfg.step_rule == "fixed":
        L *= 1.05
    backtrack = cfg.step_rule == "backtracking"

    x = np.zeros(op.p, dtype=complex) if beta0 is None else np.array(beta0, dtype=complex)
    Xx = op.forward(x)
    res_x = Xx - y
    F_x = np.vdot(res_x, res_x).real / (2 * n) + lam * np.abs(x).sum()
    yv, Xyv, t = x, Xx, 1.0
    history = []
    converged = False
    gap = None
    it = 0

    for it in range(1, cfg.max_iters + 1):
        res_y = Xyv - y
        f_y = np.vdot(res_y, res_y).real / (2 * n)
        grad = op.adjoint(res_y) / n
        while True:
            x_new = prox_complex_l1(yv - grad / L, lam / L)
            Xx_new = op.forward(x_new)
            res_new = Xx_new - y
            f_new = np.vdot(res_new, res_new).real / (2 * n)
            d = x_new - yv
            if not backtrack:
                break
            bound = f_y + np.vdot(grad, d).real + 0.5 * L * np.vdot(d, d).real
            if f_new <= bound + 1e-14 * max(1.0, abs(f_y)):
                break
            L *= 2.0
        F_new = f_new + lam * np.abs(x_new).sum()

        if F_new > F_x and yv is not x:
            # restart from the current iterate; a plain prox-gradient step is a descent step
            yv, Xyv, t = x, Xx, 1.0
            continue
        if F_new > F_x + 1e-15 * max(1.0, abs(F_x)):
            # a plain step that does not descend beyond round-off: x is a fixed point
            x_new, Xx_new, F_new = x, Xx, F_x

        step = np.linalg.norm(x_new - x)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        mom = (t - 1.0) / t_new
        yv = x_new + mom * (x_new - x)
        Xyv = Xx_new + mom * (Xx_new - Xx)
        x, Xx, F_x, t = x_new, Xx_new, F_new, t_new

        need_gap = cfg.dual_gap_tol is not None or cfg.record_history
        if need_gap and (it % cfg.gap_every == 0 or step <= cfg.rel_tol * np.linalg.norm(x)):
            r = y - Xx
            gap = _gap_from_residual(r, op.adjoint(r), y, x, lam, n)
        if cfg.record_history:
            history.append({"iteration": it, "objective": float(F_x),
                            "gap": None if gap is None else float(gap)})
        if step <= cfg.rel_tol * max(np.linalg.norm(x), 1e-300):
            if cfg.dual_gap_tol is None or (gap is not None and gap <= cfg.dual_gap_tol):
                converged = True
                break

    residual = y - op.forward(x)
    if gap is None or cfg.dual_gap_tol is not None:
        gap = _gap_from_residual(residual, op.adjoint(residual), y, x, lam, n)
    obj = np.vdot(residual, residual).real / (2 * n) + lam * np.abs(x).sum()
    return LassoSolution(x, residual, lam, it, converged, float(gap), float(obj), history)


def solve_classo_reference(X_dense, y, lam: float, gap_tol: float = 1e-10,
                           max_iters: int = 10_000_000) -> LassoSolution:
    """Plain proximal gradient with the exact Lipschitz step, run to a tiny duality gap.

    Meant as a test oracle for ``p`` up to a few dozen.
    """
    X = np.asarray(X_dense, dtype=complex)
    y = np.asarray(y, dtype=complex)
    n, p = X.shape
    if y.shape != (n,):
        raise ValueError("dimension mismatch")
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    Xh = X.conj().T
    L = np.linalg.norm(X, 2) ** 2 / n
    if L == 0:
        beta = np.zeros(p, dtype=complex)
        return LassoSolution(beta, y.copy(), lam, 0, True, 0.0, objective(X, y, beta, lam))
    step = 1.0 / L
    gram = Xh @ X / n
    xty = Xh @ y / n
    beta = np.zeros(p, dtype=complex)
    check = 50
    it = 0
    while it < max_iters:
        for _ in range(check):
            beta = prox_complex_l1(beta - step * (gram @ beta - xty), lam * step)
        it += check
        r = y - X @ beta
        gap = _gap_from_residual(r, Xh @ r, y, beta, lam, n)
        if gap <= gap_tol:
            return LassoSolution(beta, r, lam, it, True, gap, objective(X, y, beta, lam))
    raise OracleFailure(f"duality gap {gap:.3e} above {gap_tol:.1e} after {it} iterations")


def cv_fold_partition(n: int, folds: int, seed) -> list:
    """Random split of ``range(n)`` into ``folds`` near-equal index sets."""
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if n < folds:
        raise ValueError("need n >= number of folds")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(perm, folds)]


def cross_validate_lambda(op: DesignOperator, y, grid: Sequence[float], folds: int = 5,
                          seed=0, cfg: Optional[LassoConfig] = None, threads: int = 1):
    """K-fold CV over ``grid``; returns ``(lambda_hat, cv_errors)``.

    Each fold is fit on its complement (so the data term is normalized by the
    training size) and scored by the summed squared held-out residuals. Ties
    go to the smallest lambda.
    """
    y = _validate(op, y)
    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise ValueError("grid values must be finite and >= 0")
    parts = cv_fold_partition(op.n, folds, seed)
    base = cfg or LassoConfig(lam=0.0, rel_tol=1e-6)
    everything = np.arange(op.n)

    def fold_error(args):
        lam, test = args
        train = np.setdiff1d(everything, test, assume_unique=True)
        sub = op.restrict_rows(train)
        sol = solve_classo(sub, y[train], replace(base, lam=float(lam)))
        pred = op.restrict_rows(test).forward(sol.beta_hat)
        return float(np.sum(np.abs(y[test] - pred) ** 2))

    jobs = [(lam, test) for lam in grid for test in parts]
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            errs = list(ex.map(fold_error, jobs))
    else:
        errs = [fold_error(j) for j in jobs]
    cv_errors = np.asarray(errs).reshape(grid.size, len(parts)).sum(axis=1)
    best = cv_errors.min()
    candidates = grid[cv_errors == best]
    return float(candidates.min()), cv_errors


def default_lambda_bar(n: int, p: int) -> float:
    """Inner scaled-LASSO weight: the universal noise threshold with sigma factored out."""
    return math.sqrt(math.log(p) / n)


def estimate_noise_scaled_lasso(op: DesignOperator, y, lambda_bar: Optional[float] = None,
                                tol: float = 1e-4, cfg: Optional[LassoConfig] = None,
                                max_outer: int = 100) -> NoiseEstimate:
    """Alternate ``beta <- lasso(lam = sigma * lambda_bar)`` and ``sigma <- ||y - X beta|| / sqrt(n)``."""
    y = _validate(op, y)
    n = op.n
    if lambda_bar is None:
        lambda_bar = default_lambda_bar(n, op.p)
    if lambda_bar <= 0:
        raise ValueError("lambda_bar must be positive")
    sigma = np.linalg.norm(y) / math.sqrt(n)
    if sigma == 0:
        return NoiseEstimate(0.0, 0, converged=True, degenerate=True)
    base = cfg or LassoConfig(lam=0.0, rel_tol=1e-7)
    beta = None
    for it in range(1, max_outer + 1):
        sol = solve_classo(op, y, replace(base, lam=sigma * lambda_bar), beta0=beta)
        beta = sol.beta_hat
        new = np.linalg.norm(sol.residual) / math.sqrt(n)
        if new == 0:
            return NoiseEstimate(0.0, it, converged=True, degenerate=True)
        if abs(new / sigma - 1.0) < tol:
            return NoiseEstimate(float(new), it)
        sigma = new
    raise NonConvergenceError(f"scaled LASSO did not settle within {max_outer} outer iterations")
