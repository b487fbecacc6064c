"""Desparsified (debiased) LASSO with the identity as approximate inverse covariance."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import haar
from .bos_design import (
    DesignOperator,
    PreconditionedHaarFourier,
    Preconditioner,
    SamplingPattern,
    SubsampledFourier,
)

__all__ = [
    "DesparsifiedEstimate",
    "WRDecomposition",
    "RemainderBoundParams",
    "desparsify",
    "desparsify_haar",
    "decompose_WR",
    "decompose_WR_haar",
    "remainder_bound",
]


@dataclass(eq=False)
class DesparsifiedEstimate:
    beta_u: np.ndarray
    sigma_hat_diag: np.ndarray
    variant: str  # "canonical" or "haar"
    n: int

    def to_dict(self) -> dict:
        inter = np.empty(2 * self.beta_u.size)
        inter[0::2] = self.beta_u.real
        inter[1::2] = self.beta_u.imag
        return {"variant": self.variant, "n": self.n, "beta_u": inter.tolist(),
                "sigma_hat_diag": np.asarray(self.sigma_hat_diag).tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "DesparsifiedEstimate":
        inter = np.asarray(d["beta_u"], dtype=float)
        return cls(inter[0::2] + 1j * inter[1::2], np.asarray(d["sigma_hat_diag"], dtype=float),
                   d["variant"], int(d["n"]))


@dataclass(eq=False)
class WRDecomposition:
    W: np.ndarray
    R: np.ndarray


def desparsify(op: DesignOperator, y, beta_hat) -> DesparsifiedEstimate:
    """``beta_u = beta_hat + X^*(y - X beta_hat) / n``."""
    if isinstance(op, PreconditionedHaarFourier):
        raise ValueError("use desparsify_haar for the preconditioned Haar design")
    y = np.asarray(y, dtype=complex)
    beta_hat = np.asarray(beta_hat, dtype=complex)
    if y.shape != (op.n,) or beta_hat.shape != (op.p,):
        raise ValueError("dimension mismatch")
    beta_u = beta_hat + op.adjoint(y - op.forward(beta_hat)) / op.n
    return DesparsifiedEstimate(beta_u, op.sigma_hat_diag(), "canonical", op.n)


def _haar_check(pattern, D, y, z_hat):
    haar.check_length(pattern.p)
    y = np.asarray(y, dtype=complex)
    z_hat = np.asarray(z_hat, dtype=complex)
    if D.n != pattern.n or y.shape != (pattern.n,) or z_hat.shape != (pattern.p,):
        raise ValueError("dimension mismatch")
    return y, z_hat


def desparsify_haar(pattern: SamplingPattern, D: Preconditioner, y, z_hat) -> DesparsifiedEstimate:
    """``beta_u = H^* z_hat + F^* D^2 (y - F H^* z_hat) / n`` in the pixel domain.

    The residual uses the LASSO estimate ``z_hat``; the ground truth is not
    available at inference time.
    """
    y, z_hat = _haar_check(pattern, D, y, z_hat)
    F = SubsampledFourier(pattern)
    beta_hat = haar.haar_inverse(z_hat)
    beta_u = beta_hat + F.adjoint(D.diag ** 2 * (y - F.forward(beta_hat))) / pattern.n
    diag = np.full(pattern.p, D.frob_sq_of_square() / pattern.n)
    return DesparsifiedEstimate(beta_u, diag, "haar", pattern.n)


def decompose_WR(op: DesignOperator, beta_true, beta_u, noise) -> WRDecomposition:
    """Split ``sqrt(n)(beta_u - beta_true)`` into ``W = X^* noise / sqrt(n)`` and the rest."""
    noise = np.asarray(noise, dtype=complex)
    if noise.shape != (op.n,):
        raise ValueError("noise must have length n")
    sq = math.sqrt(op.n)
    W = op.adjoint(noise) / sq
    R = sq * (np.asarray(beta_u) - np.asarray(beta_true)) - W
    return WRDecomposition(W, R)


def decompose_WR_haar(pattern: SamplingPattern, D: Preconditioner, beta_true, beta_u,
                      noise) -> WRDecomposition:
    """Same split with ``W = (D^2 F_Omega)^* noise / sqrt(n)``."""
    noise = np.asarray(noise, dtype=complex)
    if noise.shape != (pattern.n,) or D.n != pattern.n:
        raise ValueError("dimension mismatch")
    sq = math.sqrt(pattern.n)
    W = SubsampledFourier(pattern).adjoint(D.diag ** 2 * noise) / sq
    R = sq * (np.asarray(beta_u) - np.asarray(beta_true)) - W
    return WRDecomposition(W, R)


@dataclass(frozen=True)
class RemainderBoundParams:
    K: float
    s0: int
    p: int
    n: int
    eta: float
    delta_t: float
    sigma: float

    def __post_init__(self):
        if not (0 < self.eta < 1 and 0 < self.delta_t < 1):
            raise ValueError("eta and delta_t must lie in (0, 1)")
        if self.K < 1 or self.s0 < 0 or self.p < 2 or self.n < 1 or self.sigma < 0:
            raise ValueError("invalid remainder-bound parameters")

    @property
    def C_t_sigma(self) -> float:
        return 16.0 * math.sqrt(10.0) * self.sigma / (1.0 - self.delta_t)

    @property
    def C_delta_sigma(self) -> float:
        return math.sqrt(640.0) * self.sigma / (1.0 - self.delta_t)


def remainder_bound(params: RemainderBoundParams) -> float:
    """High-probability bound on ``||R||_inf`` for the canonical design."""
    P = params
    lp = math.log(P.p)
    l4 = math.log(4.0 * P.p / P.eta)
    first = 8.0 * P.K ** 2.5 * P.C_t_sigma * P.s0 * math.sqrt(lp / 18.0) * l4 / P.n
    second = 4.0 * math.sqrt(P.K ** 3 * P.C_delta_sigma ** 2 * P.s0 * l4 * lp / P.n)
    return first + second
