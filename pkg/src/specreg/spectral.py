"""Conditioning diagnostics for a spectral decomposition: per-eigenvalue
condition numbers kappa(lambda_i), their l2 aggregate kappa_2, a two-sided
bracket for the eigenvector condition number kappa_V, and the minimum
eigenvalue gap eta."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .matcore import SpectralDecomposition

# Below this smallest singular value the unit-column eigenvector matrix is
# treated as numerically singular and the bracket's upper end is +inf.
_SINGULAR_V_TOL = 1e-14


def eigenvalue_condition_numbers(dec: SpectralDecomposition) -> np.ndarray:
    """kappa(lambda_i) = ||v_i||_2 ||w_i||_2 (= ||w_i||_2 for unit v_i).

    Always >= 1, with equality exactly when the left and right eigenvectors
    are parallel, as for normal matrices.
    """
    v_norms = np.linalg.norm(dec.right_vectors, axis=0)
    w_norms = np.linalg.norm(dec.left_vectors, axis=0)
    return v_norms * w_norms


def kappa2(dec: SpectralDecomposition) -> float:
    """sqrt(sum_i kappa(lambda_i)^2)."""
    k = eigenvalue_condition_numbers(dec)
    return float(np.sqrt(np.sum(k * k)))


def kappa_v_bracket(dec: SpectralDecomposition) -> tuple[float, float]:
    """A computable two-sided bracket for kappa_V.

    Upper end: the condition number sigma_1(V)/sigma_n(V) of the unit-column
    right eigenvector matrix, which is itself a diagonalizer, so
    kappa_V <= kappa(V) <= sqrt(n) * kappa_2.

    Lower end: max_i kappa(lambda_i).  For distinct eigenvalues the spectral
    projector P_i = v_i w_i^H does not depend on the choice of diagonalizer:
    any W with M = W D W^{-1} gives P_i = W e_i e_i^T W^{-1}, hence
    kappa(lambda_i) = ||P_i|| <= ||W|| ||W^{-1}||.  Taking the infimum over W
    yields kappa_V >= max_i kappa(lambda_i).

    Returns +inf for the upper end when sigma_n(V) is numerically zero.
    """
    kappas = eigenvalue_condition_numbers(dec)
    lower = float(np.max(kappas))
    sv = np.linalg.svd(dec.right_vectors, compute_uv=False)
    if sv[-1] < _SINGULAR_V_TOL:
        return lower, float("inf")
    return lower, float(sv[0] / sv[-1])


def eigenvalue_gap(dec: SpectralDecomposition) -> float:
    """eta = min over pairs i != j of |lambda_i - lambda_j| (brute force)."""
    lam = dec.eigenvalues
    if len(lam) < 2:
        raise InvalidInputError("eigenvalue gap needs at least two eigenvalues")
    d = np.abs(lam[:, None] - lam[None, :])
    np.fill_diagonal(d, np.inf)
    return float(d.min())


@dataclass(frozen=True)
class ConditionReport:
    """All conditioning diagnostics of one decomposition in one place."""

    per_eigenvalue: np.ndarray
    kappa2: float
    kappa_v_lower: float
    kappa_v_upper: float
    gap: float

    def __post_init__(self):
        k = np.asarray(self.per_eigenvalue, dtype=np.float64)
        k.setflags(write=False)
        object.__setattr__(self, "per_eigenvalue", k)

    def to_json_dict(self) -> dict:
        upper = self.kappa_v_upper
        return {
            "kappa_per_eigenvalue": [float(x) for x in self.per_eigenvalue],
            "kappa2": float(self.kappa2),
            "kappa_v_lower": float(self.kappa_v_lower),
            "kappa_v_upper": float(upper) if np.isfinite(upper) else "inf",
            "gap": float(self.gap),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def condition_report(dec: SpectralDecomposition) -> ConditionReport:
    lower, upper = kappa_v_bracket(dec)
    return ConditionReport(
        per_eigenvalue=eigenvalue_condition_numbers(dec),
        kappa2=kappa2(dec),
        kappa_v_lower=lower,
        kappa_v_upper=upper,
        gap=eigenvalue_gap(dec) if dec.n >= 2 else float("inf"),
    )
