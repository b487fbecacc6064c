"""Bounded-orthonormal-system measurement operators and sampling patterns.

The Fourier kernel is unnormalized, ``F[l, k] = exp(+2j*pi*l*k/p)`` with
0-based indices, so ``|F[l, k]| = 1`` and ``F^* F = p I``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import haar

__all__ = [
    "SamplingPattern",
    "Preconditioner",
    "DesignOperator",
    "SubsampledFourier",
    "ExplicitBos",
    "PreconditionedHaarFourier",
    "sample_uniform_rows",
    "sample_density_rows",
    "apply_forward",
    "apply_adjoint",
    "sigma_hat_diag",
    "build_preconditioner",
    "fourier_matrix",
]

_DENSITY_TOL = 1e-12


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _check_density(nu, p=None):
    nu = np.asarray(nu, dtype=float)
    if nu.ndim != 1 or (p is not None and nu.shape[0] != p):
        raise ValueError("density must be a vector of length p")
    if not np.all(np.isfinite(nu)) or np.any(nu < 0):
        raise ValueError("density entries must be finite and nonnegative")
    if abs(nu.sum() - 1.0) > _DENSITY_TOL:
        raise ValueError(f"density must sum to 1 (got {nu.sum()!r})")
    return nu


@dataclass(frozen=True, eq=False)
class SamplingPattern:
    """Row indices drawn from ``[0, p)``.

    ``density`` is ``None`` for uniform sampling, otherwise the probability
    vector the rows were drawn from.
    """

    indices: np.ndarray
    p: int
    with_replacement: bool
    density: Optional[np.ndarray] = None

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1:
            raise ValueError("indices must be one-dimensional")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if idx.size and (idx.min() < 0 or idx.max() >= self.p):
            raise ValueError("row index out of range [0, p)")
        if not self.with_replacement and np.unique(idx).size != idx.size:
            raise ValueError("indices must be distinct when sampling without replacement")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        if self.density is not None:
            nu = _check_density(self.density, self.p).copy()
            nu.setflags(write=False)
            object.__setattr__(self, "density", nu)

    @property
    def n(self) -> int:
        return int(self.indices.shape[0])

    def subset(self, positions) -> "SamplingPattern":
        """Pattern made of the rows at ``positions`` (positions into ``indices``)."""
        return SamplingPattern(self.indices[np.asarray(positions)], self.p,
                               self.with_replacement, self.density)

    def multiplicities(self) -> np.ndarray:
        return np.bincount(self.indices, minlength=self.p)

    def to_dict(self) -> dict:
        measure = "uniform" if self.density is None else {"density": self.density.tolist()}
        return {
            "p": self.p,
            "n": self.n,
            "with_replacement": self.with_replacement,
            "indices": self.indices.tolist(),
            "measure": measure,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingPattern":
        measure = d.get("measure", "uniform")
        density = None if measure == "uniform" else measure["density"]
        pat = cls(np.asarray(d["indices"], dtype=np.int64), int(d["p"]),
                  bool(d["with_replacement"]), density)
        if "n" in d and int(d["n"]) != pat.n:
            raise ValueError("'n' does not match the number of indices")
        return pat

    @classmethod
    def from_json(cls, text: str) -> "SamplingPattern":
        return cls.from_dict(json.loads(text))


def sample_uniform_rows(p: int, n: int, with_replacement: bool, seed) -> SamplingPattern:
    """Draw ``n`` rows uniformly from ``[0, p)``.

    Without replacement this is a partial Fisher-Yates shuffle, so the first
    ``n`` entries are a uniformly random ordered ``n``-subset.
    """
    if p < 1 or n < 1:
        raise ValueError("p and n must be >= 1")
    rng = _as_rng(seed)
    if with_replacement:
        idx = rng.integers(0, p, size=n, dtype=np.int64)
    else:
        if n > p:
            raise ValueError(f"cannot draw n={n} distinct rows from p={p}")
        perm = np.arange(p, dtype=np.int64)
        swaps = rng.integers(np.arange(n), p)
        for i in range(n):
            j = swaps[i]
            perm[i], perm[j] = perm[j], perm[i]
        idx = perm[:n].copy()
    return SamplingPattern(idx, p, with_replacement)


def sample_density_rows(nu, n: int, seed) -> SamplingPattern:
    """Draw ``n`` rows i.i.d. from the probability vector ``nu`` (with replacement)."""
    nu = _check_density(nu)
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _as_rng(seed)
    cdf = np.cumsum(nu)
    cdf[-1] = 1.0
    u = rng.random(n)
    idx = np.searchsorted(cdf, u, side="right").astype(np.int64)
    # guard against zero-probability trailing entries picked by round-off
    np.minimum(idx, nu.shape[0] - 1, out=idx)
    return SamplingPattern(idx, nu.shape[0], True, nu)


@dataclass(frozen=True, eq=False)
class Preconditioner:
    """Diagonal row weights, one per sampled row."""

    diag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        if d.ndim != 1:
            raise ValueError("preconditioner must be a vector")
        if not np.all(np.isfinite(d)) or np.any(d <= 0):
            raise ValueError("preconditioner entries must be positive and finite")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "diag", d)

    @property
    def n(self) -> int:
        return int(self.diag.shape[0])

    def frob_sq_of_square(self) -> float:
        """``||D^2||_F^2 = sum_j d_j^4``."""
        return float(np.sum(self.diag ** 4))

    def subset(self, positions) -> "Preconditioner":
        return Preconditioner(self.diag[np.asarray(positions)])

    @classmethod
    def identity(cls, n: int) -> "Preconditioner":
        return cls(np.ones(n))


def build_preconditioner(kappa, pattern: SamplingPattern) -> Preconditioner:
    """Weights ``d = ||kappa||_2 / (sqrt(p) * kappa[j])`` for each sampled row ``j``."""
    kappa = np.asarray(kappa, dtype=float)
    if kappa.shape != (pattern.p,):
        raise ValueError("kappa must have length p")
    if np.any(~np.isfinite(kappa)) or np.any(kappa <= 0):
        raise ValueError("kappa must be strictly positive")
    scale = np.linalg.norm(kappa) / np.sqrt(pattern.p)
    return Preconditioner(scale / kappa[pattern.indices])


def fourier_matrix(rows, p: int) -> np.ndarray:
    """Dense rows of the unnormalized DFT kernel ``exp(+2j*pi*l*k/p)``."""
    rows = np.asarray(rows, dtype=np.int64)
    k = np.arange(p, dtype=np.int64)
    # reduce l*k mod p in integers before scaling to keep the phase exact
    return np.exp(2j * np.pi * ((rows[:, None] * k[None, :]) % p) / p)


class DesignOperator:
    """A linear map ``C^p -> C^n`` with forward and adjoint application."""

    p: int
    n: int
    K: float

    def forward(self, beta: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def adjoint(self, v: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def sigma_hat_diag(self) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def restrict_rows(self, positions) -> "DesignOperator":  # pragma: no cover - abstract
        raise NotImplementedError

    def sq_norm(self) -> Optional[float]:
        """Exact ``||X||_2^2`` when cheaply known, else ``None``."""
        return None

    def to_dense(self) -> np.ndarray:
        eye = np.eye(self.p, dtype=complex)
        return np.stack([self.forward(eye[:, k]) for k in range(self.p)], axis=1)

    def _check_beta(self, beta):
        beta = np.asarray(beta)
        if beta.shape != (self.p,):
            raise ValueError(f"expected a vector of length p={self.p}, got shape {beta.shape}")
        return beta

    def _check_v(self, v):
        v = np.asarray(v)
        if v.shape != (self.n,):
            raise ValueError(f"expected a vector of length n={self.n}, got shape {v.shape}")
        return v


def _fourier_forward(beta, indices, p):
    # p * ifft gives sum_k beta_k exp(+2j*pi*l*k/p)
    return np.fft.ifft(beta)[indices] * p


def _fourier_adjoint(v, indices, p):
    scattered = np.zeros(p, dtype=complex)
    np.add.at(scattered, indices, v)
    return np.fft.fft(scattered)


@dataclass(frozen=True, eq=False)
class SubsampledFourier(DesignOperator):
    pattern: SamplingPattern
    K: float = field(default=1.0, init=False)

    @property
    def p(self) -> int:
        return self.pattern.p

    @property
    def n(self) -> int:
        return self.pattern.n

    def forward(self, beta):
        beta = self._check_beta(beta)
        return _fourier_forward(beta, self.pattern.indices, self.p)

    def adjoint(self, v):
        v = self._check_v(v)
        return _fourier_adjoint(v, self.pattern.indices, self.p)

    def sigma_hat_diag(self):
        return np.ones(self.p)

    def sq_norm(self):
        # X X^* = p * [t_l == t_m], whose largest eigenvalue is p * max multiplicity
        return float(self.p * self.pattern.multiplicities().max())

    def restrict_rows(self, positions):
        return SubsampledFourier(self.pattern.subset(positions))

    def to_dense(self):
        return fourier_matrix(self.pattern.indices, self.p)


@dataclass(frozen=True, eq=False)
class ExplicitBos(DesignOperator):
    """Dense BOS sampling matrix; intended for small ``p`` only."""

    matrix: np.ndarray
    K: float = 1.0

    def __post_init__(self):
        a = np.array(self.matrix, dtype=complex)
        if a.ndim != 2:
            raise ValueError("matrix must be two-dimensional")
        if np.abs(a).max(initial=0.0) > self.K * (1 + 1e-12):
            raise ValueError("matrix entry exceeds the BOS bound K")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @property
    def p(self):
        return self.matrix.shape[1]

    @property
    def n(self):
        return self.matrix.shape[0]

    def forward(self, beta):
        return self.matrix @ self._check_beta(beta)

    def adjoint(self, v):
        return self.matrix.conj().T @ self._check_v(v)

    def sigma_hat_diag(self):
        return np.sum(np.abs(self.matrix) ** 2, axis=0) / self.n

    def sq_norm(self):
        return float(np.linalg.norm(self.matrix, 2) ** 2)

    def restrict_rows(self, positions):
        return ExplicitBos(self.matrix[np.asarray(positions)], self.K)

    def to_dense(self):
        return np.array(self.matrix)


@dataclass(frozen=True, eq=False)
class PreconditionedHaarFourier(DesignOperator):
    """``A = D F_Omega H^*`` acting on Haar coefficients ``z``."""

    pattern: SamplingPattern
    precond: Preconditioner
    K: float = 1.0

    def __post_init__(self):
        if self.precond.n != self.pattern.n:
            raise ValueError("preconditioner length must equal the number of sampled rows")
        haar.check_length(self.pattern.p)

    @property
    def p(self):
        return self.pattern.p

    @property
    def n(self):
        return self.pattern.n

    def forward(self, z):
        z = self._check_beta(z)
        return self.precond.diag * _fourier_forward(haar.haar_inverse(z), self.pattern.indices, self.p)

    def adjoint(self, v):
        v = self._check_v(v)
        return haar.haar_forward(_fourier_adjoint(self.precond.diag * v, self.pattern.indices, self.p))

    def sigma_hat_diag(self):
        # diagonal of (1/n) F^* D^4 F is sum_j d_j^4 / n for every coordinate
        return np.full(self.p, self.precond.frob_sq_of_square() / self.n)

    def sq_norm(self):
        # A A^* = D (F F^*) D with F F^* = p * [t_l == t_m]
        d2 = self.precond.diag ** 2
        blocks = np.bincount(self.pattern.indices, weights=d2, minlength=self.p)
        return float(self.p * blocks.max())

    def restrict_rows(self, positions):
        return PreconditionedHaarFourier(self.pattern.subset(positions),
                                         self.precond.subset(positions), self.K)

    def fourier_part(self) -> SubsampledFourier:
        return SubsampledFourier(self.pattern)


def apply_forward(op: DesignOperator, beta) -> np.ndarray:
    return op.forward(beta)


def apply_adjoint(op: DesignOperator, v) -> np.ndarray:
    return op.adjoint(v)


def sigma_hat_diag(op: DesignOperator) -> np.ndarray:
    return op.sigma_hat_diag()
