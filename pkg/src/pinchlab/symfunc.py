"""Elementary symmetric polynomials of principal curvature tuples.

Works for any dimension n: the mesh pipeline only ever feeds n = 2 tuples,
but the kernel is exercised on synthetic tuples of arbitrary length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CurvatureTuple:
    """Principal curvatures (kappa_1, ..., kappa_n) at a point."""

    kappa: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kappa", np.atleast_1d(np.asarray(self.kappa, dtype=float)))
        if self.kappa.ndim != 1 or self.kappa.size < 1:
            raise ValueError("kappa must be a nonempty 1-D array")
        if not np.all(np.isfinite(self.kappa)):
            raise ValueError("curvatures must be finite")

    @property
    def n(self) -> int:
        return self.kappa.size


@dataclass(frozen=True)
class MaclaurinResult:
    """Outcome of the curvature-power chain check.

    ``hypothesis_ok`` is False when the requested H_k is not positive, in
    which case ``values`` is empty and ``monotone`` is False.
    """

    values: np.ndarray
    monotone: bool
    hypothesis_ok: bool


def elem_sym(t: CurvatureTuple, k: int) -> float:
    """e_k(kappa) via the degree-k coefficients of prod(1 + kappa_i x).

    O(n*k) time, no combinatorial enumeration; e_0 = 1 by convention.
    The tuple is sorted internally so the result is bitwise independent
    of the input ordering.
    """
    n = t.n
    if not 0 <= k <= n:
        raise ValueError(f"k must be in 0..{n}, got {k}")
    coeffs = np.zeros(k + 1)
    coeffs[0] = 1.0
    for i, kap in enumerate(np.sort(t.kappa)):
        top = min(i + 1, k)
        coeffs[1: top + 1] += kap * coeffs[0: top]
    return float(coeffs[k])


def _elem_sym_all(kappa: np.ndarray, kmax: int) -> np.ndarray:
    """All of e_0..e_kmax in one recurrence pass (same ordering as elem_sym)."""
    coeffs = np.zeros(kmax + 1)
    coeffs[0] = 1.0
    for kap in np.sort(kappa):
        coeffs[1:] = coeffs[1:] + kap * coeffs[:-1]
    return coeffs


def normalized_Hk(t: CurvatureTuple, k: int) -> float:
    """H_k = e_k / C(n, k), with H_0 = 1 and H_{n+1} = 0 by convention."""
    n = t.n
    if not 0 <= k <= n + 1:
        raise ValueError(f"k must be in 0..{n + 1}, got {k}")
    if k == 0:
        return 1.0
    if k == n + 1:
        return 0.0
    return elem_sym(t, k) / math.comb(n, k)


def maclaurin_chain(t: CurvatureTuple, k: int, slack: float = 1e-12) -> MaclaurinResult:
    """Check H_k^(1/k) <= H_(k-1)^(1/(k-1)) <= ... <= H_1 with slack.

    Requires H_k > 0 (the chain's hypothesis); a nonpositive H_k is
    reported as a hypothesis violation, not an exception. Chain entries
    with nonpositive intermediate H_j are NaN and break monotonicity.
    """
    n = t.n
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    e = _elem_sym_all(t.kappa, k)
    h = np.array([e[j] / math.comb(n, j) for j in range(k + 1)])
    if h[k] <= 0.0:
        return MaclaurinResult(values=np.array([]), monotone=False, hypothesis_ok=False)
    with np.errstate(invalid="ignore"):
        roots = np.where(h[1:] > 0.0, np.abs(h[1:]) ** (1.0 / np.arange(1, k + 1)), np.nan)
    diffs = np.diff(roots)
    monotone = bool(np.all(np.isfinite(roots)) and np.all(diffs <= slack))
    return MaclaurinResult(values=roots, monotone=monotone, hypothesis_ok=True)


def power_sums(t: CurvatureTuple, jmax: int) -> np.ndarray:
    """p_1..p_jmax with p_j = sum(kappa_i^j)."""
    return np.array([(t.kappa ** j).sum() for j in range(1, jmax + 1)])
