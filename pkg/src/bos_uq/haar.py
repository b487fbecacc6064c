"""Orthonormal 1-D Haar transform and the kappa weights for variable-density sampling.

Coefficients are ordered as ``[scaling, coarsest detail, ..., finest details]``
with each level stored contiguously.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "HaarTransform",
    "KappaWeights",
    "haar_forward",
    "haar_inverse",
    "haar_matrix",
    "kappa_weights",
    "check_length",
    "frequency_rank_order",
    "assign_to_rows",
]

_SQRT_HALF = 1.0 / math.sqrt(2.0)
KAPPA_CONST = 3.0 * math.sqrt(2.0 * math.pi)


def check_length(p: int) -> int:
    if p < 1 or (p & (p - 1)) != 0:
        raise ValueError(f"Haar transform needs a power-of-two length, got {p}")
    return int(p).bit_length() - 1


def haar_forward(x) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 1:
        raise ValueError("expected a vector")
    check_length(x.shape[0])
    out = np.array(x, dtype=np.result_type(x.dtype, float))
    m = out.shape[0]
    while m > 1:
        even, odd = out[0:m:2].copy(), out[1:m:2].copy()
        half = m // 2
        out[:half] = (even + odd) * _SQRT_HALF
        out[half:m] = (even - odd) * _SQRT_HALF
        m = half
    return out


def haar_inverse(z) -> np.ndarray:
    z = np.asarray(z)
    if z.ndim != 1:
        raise ValueError("expected a vector")
    p = z.shape[0]
    check_length(p)
    out = np.array(z, dtype=np.result_type(z.dtype, float))
    m = 1
    while m < p:
        avg, diff = out[:m].copy(), out[m:2 * m].copy()
        out[0:2 * m:2] = (avg + diff) * _SQRT_HALF
        out[1:2 * m:2] = (avg - diff) * _SQRT_HALF
        m *= 2
    return out


def haar_matrix(p: int) -> np.ndarray:
    """Explicit orthonormal Haar matrix built from the basis functions.

    Row 0 is the constant ``1/sqrt(p)``; the detail row at level ``l`` and
    shift ``k`` is ``+-2^(l/2)/sqrt(p)`` on its support of length ``p/2^l``.
    """
    levels = check_length(p)
    g = np.zeros((p, p))
    g[0] = 1.0 / math.sqrt(p)
    row = 1
    for lev in range(levels):
        width = p >> lev
        amp = math.sqrt(2.0 ** lev / p)
        for k in range(1 << lev):
            start = k * width
            g[row, start:start + width // 2] = amp
            g[row, start + width // 2:start + width] = -amp
            row += 1
    return g


@dataclass(frozen=True)
class HaarTransform:
    p: int

    def __post_init__(self):
        check_length(self.p)

    @property
    def levels(self) -> int:
        return check_length(self.p)

    def forward(self, x):
        if np.shape(x) != (self.p,):
            raise ValueError("length mismatch")
        return haar_forward(x)

    def inverse(self, z):
        if np.shape(z) != (self.p,):
            raise ValueError("length mismatch")
        return haar_inverse(z)

    def matrix(self):
        return haar_matrix(self.p)


@dataclass(frozen=True, eq=False)
class KappaWeights:
    kappa: np.ndarray
    variant: str

    @property
    def norm_sq(self) -> float:
        return float(np.sum(self.kappa ** 2))

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_sq)

    def density(self) -> np.ndarray:
        """Sampling measure ``nu(j) = kappa_j^2 / ||kappa||_2^2``."""
        nu = self.kappa ** 2 / self.norm_sq
        return nu / nu.sum()


def kappa_weights(p: int, variant: str = "theorem") -> KappaWeights:
    """``kappa_j = 3 sqrt(2 pi) / sqrt(j)`` for 1-based ``j``; ``"clipped"`` caps it at 1."""
    if p < 1:
        raise ValueError("p must be >= 1")
    variant = variant.lower()
    j = np.arange(1, p + 1, dtype=float)
    kappa = KAPPA_CONST / np.sqrt(j)
    if variant == "clipped":
        kappa = np.minimum(kappa, 1.0)
    elif variant != "theorem":
        raise ValueError(f"unknown kappa variant {variant!r}")
    kappa.setflags(write=False)
    return KappaWeights(kappa, variant)


def frequency_rank_order(p: int) -> np.ndarray:
    """Row indices sorted as frequencies 0, 1, -1, 2, -2, ... (``-k`` is row ``p - k``)."""
    k = np.arange(p)
    freq = np.where(k <= p // 2, k, k - p)
    return np.argsort(2 * np.abs(freq) - (freq > 0), kind="stable")


def assign_to_rows(kappa: KappaWeights, ordering: str = "index") -> KappaWeights:
    """Map weight ``j`` to a Fourier row: row ``j - 1`` (``"index"``) or the ``j``-th
    lowest ``|frequency|`` (``"frequency_rank"``)."""
    if ordering == "index":
        return kappa
    if ordering != "frequency_rank":
        raise ValueError(f"unknown kappa ordering {ordering!r}")
    out = np.empty_like(kappa.kappa)
    out[frequency_rank_order(kappa.kappa.size)] = kappa.kappa
    out.setflags(write=False)
    return KappaWeights(out, kappa.variant)
