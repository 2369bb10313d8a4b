"""Weighted sequence norms, discrete Hilbert-type operators, infinite
products with certified deviation bounds, and the finite-section
Schur-complement invertibility test.

Operators act on finite truncations indexed from 1; boundedness statements
are validated empirically in the test suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ["WeightedSeq", "weighted_norm", "op_A", "op_G", "inf_product",
           "sin_product", "schur_invertible", "SchurResult", "zeta_tail"]


def zeta_tail(a: float, k: int) -> float:
    """sum_{j >= a} j^(-2k) by Euler-Maclaurin; accurate for a >= 8."""
    s = 2 * k
    return a ** (1 - s) / (s - 1) + 0.5 * a ** (-s) + s / 12.0 * a ** (-s - 1)


@dataclass(frozen=True)
class WeightedSeq:
    """Finite sequence (x_1, ..., x_L) tagged with its weighted-space label.

    The norm is (sum <n>^{sp} |x_n|^p)^{1/p} with <n> = 1 + n; p = inf takes
    the weighted maximum.
    """

    entries: np.ndarray
    s: float = 0.0
    p: float = 2.0

    def norm(self) -> float:
        return weighted_norm(self.entries, self.s, self.p)


def weighted_norm(x, s: float, p: float) -> float:
    x = np.asarray(x)
    n = np.arange(1, x.size + 1, dtype=float)
    w = (1.0 + n) ** s
    if p == math.inf:
        return float(np.max(w * np.abs(x))) if x.size else 0.0
    return float(np.sum((w * np.abs(x)) ** p) ** (1.0 / p))


def _as_entries(x):
    if isinstance(x, WeightedSeq):
        return np.asarray(x.entries), x
    return np.asarray(x), None


def op_A(x):
    """(Ax)_n = sum_{m != n} x_m / (m^2 - n^2), an exact finite double sum.

    Smooths by one weight order: a WeightedSeq input comes back labeled
    (s+1, p).
    """
    e, tag = _as_entries(x)
    L = e.size
    m = np.arange(1, L + 1)
    denom = m[None, :] ** 2 - m[:, None] ** 2      # [n, m]
    with np.errstate(divide="ignore"):
        kern = np.where(denom != 0, 1.0 / np.where(denom == 0, 1, denom), 0.0)
    out = kern @ e
    if tag is not None:
        return WeightedSeq(out, tag.s + 1.0, tag.p)
    return out


def op_G(x):
    """(Gx)_n = sum_{m != n} x_m / |m - n|^2 (bounded by 4 on every ell^p)."""
    e, tag = _as_entries(x)
    L = e.size
    m = np.arange(1, L + 1)
    d = np.abs(m[None, :] - m[:, None])
    with np.errstate(divide="ignore"):
        kern = np.where(d != 0, 1.0 / np.where(d == 0, 1, d) ** 2, 0.0)
    out = kern @ e
    if tag is not None:
        return WeightedSeq(out, tag.s, tag.p)
    return out


def inf_product(a, mode: str = "value"):
    """prod(1 + a_m) and, in bound mode, the certified deviation bound
    |prod - 1| <= A e^S + B e^{S + S^2} with A = |sum a|, B = sum |a|^2,
    S = sum |a| (requires |a_m| <= 1/2)."""
    a = np.asarray(a)
    value = complex(np.prod(1.0 + a))
    if np.isrealobj(a):
        value = value.real
    if mode == "value":
        return value, None
    if mode != "bound":
        raise ValidationError("mode must be 'value' or 'bound'")
    if a.size and np.max(np.abs(a)) > 0.5:
        raise ValidationError("certified bound requires |a_m| <= 1/2")
    A = abs(np.sum(a))
    B = float(np.sum(np.abs(a) ** 2))
    S = float(np.sum(np.abs(a)))
    return value, A * math.exp(S) + B * math.exp(S + S * S)


def sin_product(lam: float, M: int, tail_correction: bool = True) -> float:
    """Truncated sin-product prod_{m <= M} (m^2 pi^2 - lam)/(m^2 pi^2),
    converging to sin(sqrt(lam))/sqrt(lam).

    The tail correction multiplies by exp(-sum_{k} (lam/pi^2)^k zeta_tail/k),
    removing the O(lam / (pi^2 M)) truncation bias.
    """
    m = np.arange(1, M + 1, dtype=float)
    val = float(np.prod(1.0 - lam / (m * m * math.pi ** 2)))
    if tail_correction:
        corr = 0.0
        for k in range(1, 5):
            corr -= (lam / math.pi ** 2) ** k / k * zeta_tail(M + 1, k)
        val *= math.exp(corr)
    return val


@dataclass(frozen=True)
class SchurResult:
    invertible: bool
    reason: str
    tail_norm: float
    det_schur: complex

    def __bool__(self) -> bool:
        return self.invertible


def schur_invertible(T: np.ndarray, N: int) -> SchurResult:
    """Is I + T invertible, judged through the head/tail split at N?

    Sufficient criterion: the tail block D has operator norm < 1 and the
    Schur complement S = I + A - B (I + D)^{-1} C has nonzero determinant
    (within 1e-12 of the scale).
    """
    T = np.asarray(T)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValidationError("T must be square")
    if not 0 < N <= T.shape[0]:
        raise ValidationError("split index N out of range")
    A = T[:N, :N]
    B = T[:N, N:]
    C = T[N:, :N]
    D = T[N:, N:]
    tail = float(np.linalg.norm(D, 2)) if D.size else 0.0
    if tail >= 1.0:
        return SchurResult(False, "tail norm >= 1", tail, 0.0)
    S = np.eye(N) + A
    if D.size:
        S = S - B @ np.linalg.solve(np.eye(D.shape[0]) + D, C)
    det = complex(np.linalg.det(S))
    if abs(det) <= 1e-12:
        return SchurResult(False, "Schur complement singular", tail, det)
    return SchurResult(True, "", tail, det)
