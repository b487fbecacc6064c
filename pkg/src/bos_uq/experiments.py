"""Experiment runners: synthetic coverage, Haar pipeline, lambda sweep, image, theory checks.

Every runner is a pure function of its config. Randomness flows from
``cfg.seed`` through :func:`trial_rng`, so results do not depend on the
number of worker threads.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
from scipy.fft import next_fast_len

from . import haar, imageio, uq
from .bos_design import (
    PreconditionedHaarFourier,
    SubsampledFourier,
    build_preconditioner,
    sample_density_rows,
    sample_uniform_rows,
)
from .classo import (
    LassoConfig,
    cross_validate_lambda,
    estimate_noise_scaled_lasso,
    lambda0,
    lambda0_preconditioned,
    solve_classo,
)
from .desparsify import decompose_WR, decompose_WR_haar, desparsify, desparsify_haar
from .theory_checks import (
    bernstein_check,
    check_noise_event,
    check_oracle_inequalities,
    complex_noise,
    rip_constant_bruteforce,
)

__all__ = [
    "LambdaRule",
    "ExperimentConfig",
    "ExperimentReport",
    "trial_rng",
    "run_synthetic",
    "run_haar",
    "run_lambda_sweep",
    "run_image",
    "run_checks",
    "run_experiment",
    "default_config",
]

EXPERIMENTS = ("synthetic", "haar", "sweep", "image", "checks")
# do not change results, so kept out of report.json
EXECUTION_FIELDS = ("threads", "out_dir")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LambdaRule:
    """``kind`` is ``"lambda0_multiple"`` (uses ``factor``), ``"fixed"`` (``value``)
    or ``"cv"`` (``grid`` of lambda0 multiples, ``folds``)."""

    kind: str = "lambda0_multiple"
    factor: float = 3.0
    value: Optional[float] = None
    grid: Optional[tuple] = None
    folds: int = 5

    def __post_init__(self):
        if self.kind not in ("lambda0_multiple", "fixed", "cv"):
            raise ConfigError(f"unknown lambda rule {self.kind!r}")
        if self.kind == "fixed" and (self.value is None or self.value < 0):
            raise ConfigError("fixed lambda rule needs a nonnegative value")
        if self.kind == "cv" and not self.grid:
            raise ConfigError("cv lambda rule needs a grid")
        if self.grid is not None:
            object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "synthetic"
    p: int = 1000
    n: int = 400
    s0: int = 10
    sigma: float = 0.15
    alpha: float = 0.05
    lambda_rule: LambdaRule = field(default_factory=LambdaRule)
    trials: int = 100
    seed: int = 0
    noise_source: str = "true_sigma"  # or "scaled_lasso"
    sample_split: bool = False
    with_replacement: bool = False
    # Haar experiment
    kappa_variant: str = "clipped"
    kappa_ordering: str = "index"  # or "frequency_rank"
    relative_noise: Optional[float] = None
    # lambda sweep
    factors: Optional[tuple] = None
    cv_folds: int = 5
    cv_trials: int = 1
    # image experiment
    image_path: Optional[str] = None
    threshold: float = 0.5
    phantom_shape: tuple = (64, 64)
    phantom_hot_pixels: int = 40
    top_k: int = 68
    # solver
    rel_tol: float = 1e-6
    max_iters: int = 5000
    threads: int = 1
    out_dir: Optional[str] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not (0 < self.alpha < 1):
            raise ConfigError("alpha must lie in (0, 1)")
        if self.p < 2 or self.n < 1 or self.trials < 1:
            raise ConfigError("need p >= 2, n >= 1, trials >= 1")
        if self.s0 < 0 or self.s0 > self.p:
            raise ConfigError("need 0 <= s0 <= p")
        if self.experiment in ("synthetic", "sweep") and not self.with_replacement and self.n > self.p:
            raise ConfigError("n > p requires sampling with replacement")
        if self.experiment == "haar" and (self.p & (self.p - 1)):
            raise ConfigError("Haar experiment needs p a power of two")
        if self.noise_source not in ("true_sigma", "scaled_lasso"):
            raise ConfigError(f"unknown noise source {self.noise_source!r}")
        if self.sigma < 0:
            raise ConfigError("sigma must be >= 0")
        if isinstance(self.lambda_rule, dict):
            object.__setattr__(self, "lambda_rule", LambdaRule(**self.lambda_rule))
        if self.factors is not None:
            object.__setattr__(self, "factors", tuple(float(f) for f in self.factors))
        object.__setattr__(self, "phantom_shape", tuple(int(s) for s in self.phantom_shape))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["phantom_shape"] = list(self.phantom_shape)
        return d

    def echo(self) -> dict:
        """Config as embedded in reports: execution-only fields are left out."""
        d = self.to_dict()
        for k in EXECUTION_FIELDS:
            d.pop(k)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def solver(self, lam: float) -> LassoConfig:
        return LassoConfig(lam=lam, rel_tol=self.rel_tol, max_iters=self.max_iters)


def default_config(experiment: str, **overrides) -> ExperimentConfig:
    """Desk-scale defaults for each experiment."""
    base: dict[str, Any] = {"experiment": experiment}
    if experiment == "haar":
        base.update(p=1024, n=int(0.95 * 1024), s0=20, relative_noise=0.033,
                    lambda_rule=LambdaRule(factor=85.0), trials=50)
    elif experiment == "sweep":
        base.update(factors=tuple(k / 4 for k in range(1, 81)), trials=20)
    elif experiment == "image":
        base.update(p=64 * 64, n=int(0.4 * 64 * 64), threshold=0.5, relative_noise=0.106,
                    lambda_rule=LambdaRule(factor=25.0))
    base.update(overrides)
    return ExperimentConfig(**base)


@dataclass
class ExperimentReport:
    config: dict
    resolved: dict
    results: dict
    tables: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    def to_json(self) -> str:
        """Deterministic JSON; timing is kept out so identical runs serialize identically."""
        return json.dumps({"config": self.config, "resolved": self.resolved,
                           "results": self.results}, sort_keys=True, indent=2,
                          default=_json_default)

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.to_json())
        for name, text in self.tables.items():
            (out / name).write_bytes(text if isinstance(text, bytes) else text.encode())
        (out / "timing.json").write_text(json.dumps({"wall_clock_seconds": self.wall_clock}))
        return out


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"not serializable: {type(o)}")


def _nan_to_none(x):
    return None if isinstance(x, float) and math.isnan(x) else x


def trial_rng(master_seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Generator keyed by ``(master_seed, stream, index)``; stream 0 is setup, 1 is trials."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), stream, index]))


def _map_trials(fn: Callable[[int], dict], trials: int, threads: int) -> list:
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(fn, range(trials)))
    return [fn(i) for i in range(trials)]


def _draw_truth(rng, p, s0):
    support = np.sort(rng.choice(p, size=s0, replace=False))
    beta0 = np.zeros(p, dtype=complex)
    beta0[support] = complex_noise(rng, math.sqrt(2.0), s0)
    if s0:
        beta0 /= np.linalg.norm(beta0)
    return beta0, support


def _resolve_lambda(rule: LambdaRule, lam0: float, op, y, cfg: ExperimentConfig, seed):
    if rule.kind == "fixed":
        return float(rule.value)
    if rule.kind == "lambda0_multiple":
        return rule.factor * lam0
    grid = [g * lam0 for g in rule.grid]
    lam, _ = cross_validate_lambda(op, y, grid, rule.folds, seed, cfg.solver(0.0))
    return lam


def _sigma_for_inference(cfg, op, y):
    if cfg.noise_source == "true_sigma":
        return cfg.sigma
    return estimate_noise_scaled_lasso(op, y, cfg=cfg.solver(0.0)).sigma_hat


def _thin_qq(samples, max_points=2000):
    if len(samples) < 2:
        return np.zeros((0, 2))
    qq = uq.qq_points(samples)
    if qq.shape[0] > max_points:
        keep = np.unique(np.linspace(0, qq.shape[0] - 1, max_points).round().astype(int))
        qq = qq[keep]
    return qq


def _qq_csv(qq) -> str:
    lines = ["theoretical,empirical"]
    lines += [f"{a!r},{b!r}" for a, b in qq.tolist()]
    return "\n".join(lines) + "\n"


def _normalized(diff, sigma_hat, sig_diag, n):
    if sigma_hat <= 0:
        nan = np.full(np.shape(diff), np.nan)
        return nan, nan.copy()
    scale = math.sqrt(2 * n) / (sigma_hat * np.sqrt(sig_diag))
    return np.real(diff) * scale, np.imag(diff) * scale


def _coverage_results(trial_out, support, extra_keys=()):
    reports = [t["coverage"] for t in trial_out]
    agg = uq.combine_reports(reports)
    re = np.concatenate([t["norm_re"] for t in trial_out])
    im = np.concatenate([t["norm_im"] for t in trial_out])
    finite = np.isfinite(re) & np.isfinite(im)
    res = {
        "h": agg.h,
        "h_support": _nan_to_none(agg.h_support),
        "support_size": int(len(support)),
        "trials": agg.trials,
        "h_per_trial": [r.h for r in reports],
        "h_support_per_trial": [_nan_to_none(r.h_support) for r in reports],
        "lambda_per_trial": [t["lam"] for t in trial_out],
        "sigma_hat_per_trial": [t["sigma_hat"] for t in trial_out],
        "pooled_samples": int(finite.sum()),
        "ks_real": uq.ks_statistic(re[finite]) if finite.sum() >= 2 else None,
        "ks_imag": uq.ks_statistic(im[finite]) if finite.sum() >= 2 else None,
        "remainder_inf_median": float(np.median([t["R_inf"] for t in trial_out])),
        "solver_converged_fraction": float(np.mean([t["converged"] for t in trial_out])),
    }
    for k in extra_keys:
        res[k] = [t[k] for t in trial_out]
    return res, agg, re[finite]


# --------------------------------------------------------------------------- synthetic

def _synthetic_setup(cfg: ExperimentConfig):
    rng = trial_rng(cfg.seed, 0)
    pattern = sample_uniform_rows(cfg.p, cfg.n, cfg.with_replacement, rng)
    beta0, support = _draw_truth(rng, cfg.p, cfg.s0)
    return SubsampledFourier(pattern), beta0, support


def _synthetic_trial(cfg, op, beta0, support, i, lam_override=None):
    rng = trial_rng(cfg.seed, 1, i)
    eps = complex_noise(rng, cfg.sigma, op.n)
    y = op.forward(beta0) + eps
    if cfg.sample_split:
        half = op.n // 2
        first, second = np.arange(half), np.arange(half, op.n)
        fit_op, fit_y = op.restrict_rows(first), y[first]
        inf_op, inf_y, inf_eps = op.restrict_rows(second), y[second], eps[second]
    else:
        fit_op, fit_y = op, y
        inf_op, inf_y, inf_eps = op, y, eps
    sigma_hat = _sigma_for_inference(cfg, fit_op, fit_y)
    lam0 = lambda0(sigma_hat, 1.0, fit_op.n, op.p)
    if lam_override is not None:
        lam = lam_override
    else:
        lam = _resolve_lambda(cfg.lambda_rule, lam0, fit_op, fit_y, cfg, cfg.seed + i)
    sol = solve_classo(fit_op, fit_y, cfg.solver(lam))
    est = desparsify(inf_op, inf_y, sol.beta_hat)
    region = uq.confidence_circle(est.beta_u, sigma_hat, est.sigma_hat_diag, inf_op.n, cfg.alpha)
    cov = uq.hitrate(beta0, region, support)
    wr = decompose_WR(inf_op, beta0, est.beta_u, inf_eps)
    nre, nim = _normalized(est.beta_u - beta0, sigma_hat, est.sigma_hat_diag, inf_op.n)
    return {"coverage": cov, "norm_re": nre, "norm_im": nim, "lam": float(lam),
            "sigma_hat": float(sigma_hat), "R_inf": float(np.abs(wr.R).max()),
            "converged": bool(sol.converged), "region": region}


def run_synthetic(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg.experiment != "synthetic":
        raise ConfigError("run_synthetic needs experiment='synthetic'")
    start = time.perf_counter()
    op, beta0, support = _synthetic_setup(cfg)
    out = _map_trials(lambda i: _synthetic_trial(cfg, op, beta0, support, i),
                      cfg.trials, cfg.threads)
    results, agg, pooled = _coverage_results(out, support)
    n_inf = op.n - op.n // 2 if cfg.sample_split else op.n
    lam0_true = lambda0(cfg.sigma, 1.0, op.n // 2 if cfg.sample_split else op.n, cfg.p)
    resolved = {"lambda0": lam0_true, "lambda": _resolved_lambda(cfg, lam0_true, out),
                "n_inference": n_inf, "support": support.tolist()}
    tables = {"qq.csv": _qq_csv(_thin_qq(pooled)),
              "hitrate.csv": uq.regions_csv(out[0]["region"], beta0)}
    return ExperimentReport(cfg.echo(), resolved, results, tables,
                            time.perf_counter() - start)


def _resolved_lambda(cfg, lam0, out):
    if cfg.lambda_rule.kind == "lambda0_multiple" and cfg.noise_source == "true_sigma":
        return cfg.lambda_rule.factor * lam0
    if cfg.lambda_rule.kind == "fixed":
        return cfg.lambda_rule.value
    return None  # data dependent; see lambda_per_trial


# --------------------------------------------------------------------------- Haar

def _haar_setup(cfg: ExperimentConfig):
    rng = trial_rng(cfg.seed, 0)
    kap = haar.assign_to_rows(haar.kappa_weights(cfg.p, cfg.kappa_variant), cfg.kappa_ordering)
    pattern = sample_density_rows(kap.density(), cfg.n, rng)
    D = build_preconditioner(kap.kappa, pattern)
    A = PreconditionedHaarFourier(pattern, D, K=kap.norm)
    z0 = np.zeros(cfg.p, dtype=complex)
    z0[:cfg.s0] = 1.0
    beta0 = haar.haar_inverse(z0)
    sigma = cfg.sigma
    if cfg.relative_noise is not None:
        signal = np.linalg.norm(SubsampledFourier(pattern).forward(beta0))
        sigma = cfg.relative_noise * signal / math.sqrt(cfg.n)
    return kap, pattern, D, A, z0, beta0, sigma


def _haar_trial(cfg, kap, pattern, D, A, beta0, support, sigma, i):
    rng = trial_rng(cfg.seed, 1, i)
    F = SubsampledFourier(pattern)
    eps = complex_noise(rng, sigma, cfg.n)
    y = F.forward(beta0) + eps
    yw = D.diag * y
    if cfg.noise_source == "true_sigma":
        sigma_hat = sigma
    else:
        # the weighted model D y = A z + D eps has noise level ~ sigma * rms(d)
        rms = math.sqrt(float(np.mean(D.diag ** 2)))
        sigma_hat = estimate_noise_scaled_lasso(A, yw, cfg=cfg.solver(0.0)).sigma_hat / rms
    lam0 = lambda0_preconditioned(sigma_hat, kap.norm, cfg.n, cfg.p)
    lam = _resolve_lambda(cfg.lambda_rule, lam0, A, yw, cfg, cfg.seed + i)
    sol = solve_classo(A, yw, cfg.solver(lam))
    est = desparsify_haar(pattern, D, y, sol.beta_hat)
    region = uq.confidence_circle(est.beta_u, sigma_hat, est.sigma_hat_diag, cfg.n, cfg.alpha)
    cov = uq.hitrate(beta0, region, support)
    wr = decompose_WR_haar(pattern, D, beta0, est.beta_u, eps)
    nre, nim = _normalized(est.beta_u - beta0, sigma_hat, est.sigma_hat_diag, cfg.n)
    return {"coverage": cov, "norm_re": nre, "norm_im": nim, "lam": float(lam),
            "sigma_hat": float(sigma_hat), "R_inf": float(np.abs(wr.R).max()),
            "converged": bool(sol.converged), "region": region,
            "norm_re_caption": nre / np.sqrt(est.sigma_hat_diag),
            "sigma_hat_diag_spread": float(np.ptp(est.sigma_hat_diag))}


def run_haar(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg.experiment != "haar":
        raise ConfigError("run_haar needs experiment='haar'")
    start = time.perf_counter()
    kap, pattern, D, A, z0, beta0, sigma = _haar_setup(cfg)
    support = np.flatnonzero(np.abs(beta0) > 1e-12)
    out = _map_trials(lambda i: _haar_trial(cfg, kap, pattern, D, A, beta0, support, sigma, i),
                      cfg.trials, cfg.threads)
    results, agg, pooled = _coverage_results(out, support)
    results["sigma_hat_diag_spread_max"] = max(t["sigma_hat_diag_spread"] for t in out)
    # scaling by sigma_hat * Sigma_11 instead of its square root, kept for comparison
    caption = np.concatenate([t["norm_re_caption"] for t in out])
    results["ks_real_unsquared_scaling"] = uq.ks_statistic(caption[np.isfinite(caption)])
    lam0 = lambda0_preconditioned(sigma, kap.norm, cfg.n, cfg.p)
    resolved = {"sigma": sigma, "kappa_norm": kap.norm, "lambda0_preconditioned": lam0,
                "lambda": _resolved_lambda(cfg, lam0, out),
                "sigma_hat_diag": D.frob_sq_of_square() / cfg.n,
                "distinct_rows": int(np.unique(pattern.indices).size)}
    tables = {"qq.csv": _qq_csv(_thin_qq(pooled)),
              "hitrate.csv": uq.regions_csv(out[0]["region"], beta0)}
    return ExperimentReport(cfg.echo(), resolved, results, tables,
                            time.perf_counter() - start)


# --------------------------------------------------------------------------- sweep

def run_lambda_sweep(cfg: ExperimentConfig) -> ExperimentReport:
    """Hitrates and K-fold CV error for each lambda = factor * lambda0."""
    if cfg.experiment != "sweep":
        raise ConfigError("run_lambda_sweep needs experiment='sweep'")
    start = time.perf_counter()
    factors = cfg.factors or (cfg.lambda_rule.factor,)
    base = replace(cfg, experiment="synthetic", noise_source="true_sigma")
    op, beta0, support = _synthetic_setup(base)
    lam0 = lambda0(cfg.sigma, 1.0, op.n, cfg.p)

    cv_data = []
    for i in range(min(cfg.cv_trials, cfg.trials)):
        rng = trial_rng(cfg.seed, 1, i)
        cv_data.append(op.forward(beta0) + complex_noise(rng, cfg.sigma, op.n))

    rows = []
    for f in factors:
        lam = f * lam0
        out = _map_trials(lambda i: _synthetic_trial(base, op, beta0, support, i, lam),
                          cfg.trials, cfg.threads)
        agg = uq.combine_reports([t["coverage"] for t in out])
        cv_err = 0.0
        for j, y in enumerate(cv_data):
            _, errs = cross_validate_lambda(op, y, [lam], cfg.cv_folds,
                                            trial_rng(cfg.seed, 2, j), cfg.solver(0.0))
            cv_err += float(errs[0])
        rows.append({"factor": f, "lambda": lam, "h": agg.h,
                     "h_support": _nan_to_none(agg.h_support),
                     "cv_error": cv_err / max(len(cv_data), 1)})

    hs = np.array([np.nan if r["h_support"] is None else r["h_support"] for r in rows])
    cv = np.array([r["cv_error"] for r in rows])
    fac = np.array(factors)
    best_h = float(fac[np.nanargmax(hs)]) if np.any(np.isfinite(hs)) else None
    best_cv = float(fac[np.flatnonzero(cv == cv.min())[0]])
    results = {"rows": rows, "argmax_h_support_factor": best_h, "cv_optimal_factor": best_cv}
    lines = ["factor,lambda,h,h_support,cv_error"]
    for r in rows:
        hsv = "" if r["h_support"] is None else repr(r["h_support"])
        lines.append(f"{r['factor']!r},{r['lambda']!r},{r['h']!r},{hsv},{r['cv_error']!r}")
    tables = {"sweep.csv": "\n".join(lines) + "\n"}
    return ExperimentReport(cfg.echo(), {"lambda0": lam0, "factors": list(factors)},
                            results, tables, time.perf_counter() - start)


# --------------------------------------------------------------------------- image

def _load_image(cfg):
    if cfg.image_path is None:
        return imageio.phantom(cfg.phantom_shape, cfg.phantom_hot_pixels, trial_rng(cfg.seed, 3))
    return imageio.read_image(cfg.image_path)


def run_image(cfg: ExperimentConfig, image: Optional[np.ndarray] = None) -> ExperimentReport:
    """Thresholded real image, fresh Fourier rows and noise per trial."""
    if cfg.experiment != "image":
        raise ConfigError("run_image needs experiment='image'")
    start = time.perf_counter()
    img = np.asarray(_load_image(cfg) if image is None else image, dtype=float)
    shape = img.shape
    flat = img.ravel()
    p_orig = flat.size
    truth = np.where(np.abs(flat) >= cfg.threshold, flat, 0.0)
    p = next_fast_len(p_orig)
    beta0 = np.zeros(p, dtype=complex)
    beta0[:p_orig] = truth
    support = np.flatnonzero(truth)
    n = min(cfg.n, p)
    sigma = cfg.sigma
    if cfg.relative_noise is not None:
        # mean squared row energy of F beta0 equals ||beta0||^2 for uniform rows
        sigma = cfg.relative_noise * float(np.linalg.norm(truth))
    cfg_t = replace(cfg, sigma=sigma)

    def trial(i):
        rng = trial_rng(cfg.seed, 1, i)
        op = SubsampledFourier(sample_uniform_rows(p, n, False, rng))
        eps = complex_noise(rng, sigma, n)
        y = op.forward(beta0) + eps
        sigma_hat = _sigma_for_inference(cfg_t, op, y)
        lam0 = lambda0(sigma_hat, 1.0, n, p)
        lam = _resolve_lambda(cfg.lambda_rule, lam0, op, y, cfg, cfg.seed + i)
        sol = solve_classo(op, y, cfg.solver(lam))
        est = desparsify(op, y, sol.beta_hat)
        bu = est.beta_u[:p_orig]
        sd = est.sigma_hat_diag[:p_orig]
        circle = uq.confidence_circle(bu, sigma_hat, sd, n, cfg.alpha)
        cov = uq.hitrate(beta0[:p_orig], circle, support)
        interval = uq.confidence_interval(bu, sigma_hat, sd, n, cfg.alpha, "real")
        cov_re = uq.hitrate(beta0[:p_orig], interval, support)
        s = uq.ssim(truth.reshape(shape), bu.real.reshape(shape))
        return {"coverage": cov, "coverage_real": cov_re, "ssim": s, "lam": float(lam),
                "sigma_hat": float(sigma_hat), "beta_u": bu if i == 0 else None,
                "interval": interval if i == 0 else None}

    out = _map_trials(trial, cfg.trials, cfg.threads)
    agg = uq.combine_reports([t["coverage"] for t in out])
    agg_re = uq.combine_reports([t["coverage_real"] for t in out])
    first = out[0]
    top = np.argsort(-np.abs(truth), kind="stable")[:min(cfg.top_k, p_orig)]
    listing = [{"pixel": int(j), "truth": float(truth[j]),
                "center": float(first["interval"].center[j]),
                "radius": float(first["interval"].radius[j])} for j in top]
    results = {"h": agg.h, "h_support": _nan_to_none(agg.h_support),
               "h_real_interval": agg_re.h, "h_support_real_interval": _nan_to_none(agg_re.h_support),
               "ssim": float(np.mean([t["ssim"] for t in out])), "s0": int(support.size),
               "trials": agg.trials, "lambda_per_trial": [t["lam"] for t in out],
               "top_pixel_intervals": listing}
    lam0 = lambda0(sigma, 1.0, n, p)
    resolved = {"sigma": sigma, "p_image": p_orig, "p_padded": p, "n": n, "shape": list(shape),
                "lambda0": lam0, "lambda": _resolved_lambda(cfg, lam0, out)}
    tables = {"hitrate.csv": uq.regions_csv(uq.confidence_circle(
                  first["beta_u"], first["sigma_hat"], 1.0, n, cfg.alpha), beta0[:p_orig]),
              "beta_u.pgm": imageio.pgm_bytes(np.abs(first["beta_u"]).reshape(shape))}
    return ExperimentReport(cfg.echo(), resolved, results, tables,
                            time.perf_counter() - start)


# --------------------------------------------------------------------------- checks

def run_checks(cfg: ExperimentConfig) -> ExperimentReport:
    """Noise event, oracle inequalities, RIP trend and Bernstein tail at tiny scale."""
    start = time.perf_counter()
    seed = cfg.seed
    event_op = SubsampledFourier(sample_uniform_rows(100, 50, False, trial_rng(seed, 0)))
    freq = check_noise_event(event_op, cfg.sigma, 10_000, trial_rng(seed, 1))
    oracle = check_oracle_inequalities(16, 12, 1, 0.05, 200, trial_rng(seed, 2))
    rip_medians = {}
    for n in (4, 6, 8, 10, 12, 14):
        deltas = []
        for k in range(50):
            pat = sample_uniform_rows(16, n, False, trial_rng(seed, 4, 100 * n + k))
            A = SubsampledFourier(pat).to_dense() / math.sqrt(n)
            deltas.append(rip_constant_bruteforce(A, 2).delta_s)
        rip_medians[str(n)] = float(np.median(deltas))
    emp, bound = bernstein_check(1.0, np.ones(100), 25.0, 20_000, trial_rng(seed, 5))
    results = {
        "noise_event": {"p": 100, "n": 50, "trials": 10_000, "frequency": freq,
                        "threshold": 1 - 100 ** -2 - 3 * math.sqrt(1e-4 * (1 - 1e-4) / 10_000)},
        "oracle_inequalities": oracle.to_dict(),
        "rip_median_delta2_by_n": rip_medians,
        "bernstein": {"t": 25.0, "empirical": emp, "bound": bound},
    }
    return ExperimentReport(cfg.echo(), {}, results, {}, time.perf_counter() - start)


RUNNERS = {"synthetic": run_synthetic, "haar": run_haar, "sweep": run_lambda_sweep,
           "image": run_image, "checks": run_checks}


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    return RUNNERS[cfg.experiment](cfg)
