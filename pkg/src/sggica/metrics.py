"""Separation quality: Tucker congruence with component matching, and the ACY error."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import MetricError


@dataclass(frozen=True, eq=False)
class MatchReport:
    permutation: np.ndarray
    """``permutation[i]`` is the estimated row matched to true row ``i``."""
    signs: np.ndarray
    congruences: np.ndarray
    min_congruence: float

    @property
    def mean_congruence(self):
        return float(np.mean(self.congruences))


def tucker_congruence(a, b):
    """Uncentered correlation ``sum(a b) / sqrt(sum(a^2) sum(b^2))``."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise MetricError(f"length mismatch: {a.size} vs {b.size}")
    na = np.sqrt(np.dot(a, a))
    nb = np.sqrt(np.dot(b, b))
    if na == 0 or nb == 0:
        raise MetricError("congruence undefined for a zero vector")
    return float(np.clip(np.dot(a / na, b / nb), -1.0, 1.0))


def congruence_matrix(S_true, S_est):
    S_true = np.atleast_2d(np.asarray(S_true, dtype=float))
    S_est = np.atleast_2d(np.asarray(S_est, dtype=float))
    if S_true.shape != S_est.shape:
        raise MetricError(f"shape mismatch: {S_true.shape} vs {S_est.shape}")
    nt = np.linalg.norm(S_true, axis=1)
    ne = np.linalg.norm(S_est, axis=1)
    if np.any(nt == 0) or np.any(ne == 0):
        raise MetricError("degenerate (all-zero) component row")
    return np.clip((S_true / nt[:, None]) @ (S_est / ne[:, None]).T, -1.0, 1.0)


def match_components(S_true, S_est):
    """Pair estimated rows with true rows (both d x n), resolving permutation and sign.

    The assignment maximises the total absolute congruence.
    """
    C = congruence_matrix(S_true, S_est)
    rows, cols = linear_sum_assignment(-np.abs(C))
    perm = cols[np.argsort(rows)]
    matched = C[np.arange(C.shape[0]), perm]
    signs = np.where(matched < 0, -1, 1)
    congruences = np.abs(matched)
    return MatchReport(
        permutation=perm,
        signs=signs,
        congruences=congruences,
        min_congruence=float(np.min(congruences)),
    )


def acy_error(A1, A2):
    """Amari-Cichocki-Yang error of ``B = A1^-1 A2``; 0 iff A2 = A1 P D."""
    A1 = np.atleast_2d(np.asarray(A1, dtype=float))
    A2 = np.atleast_2d(np.asarray(A2, dtype=float))
    if A1.shape != A2.shape or A1.shape[0] != A1.shape[1]:
        raise MetricError(f"need equal square matrices, got {A1.shape} and {A2.shape}")
    try:
        B = np.abs(np.linalg.solve(A1, A2))
    except np.linalg.LinAlgError as exc:
        raise MetricError("A1 is singular") from exc
    d = B.shape[0]
    rows = np.sum(B.sum(axis=1) / B.max(axis=1) - 1.0)
    cols = np.sum(B.sum(axis=0) / B.max(axis=0) - 1.0)
    return float((rows + cols) / (2 * d))
