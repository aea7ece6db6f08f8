"""Noise laws, the scaled random matrix G_n, and randomized regularization of
the eigenvector condition number.

``regularize`` draws E = delta * G_n(xi) until the perturbed matrix satisfies
the two-part certificate

    ||E|| <= c2 * delta          and
    kappa_V_upper(A + E) <= c1 * n^2 / delta * sqrt(log(n/delta))   (real laws)
    kappa_V_upper(A + E) <= c1 * n^2 / delta                        (complex law)

Each draw succeeds with probability >= 1/2 once c1, c2 are calibrated, so a
short geometric retry loop suffices.  The shipped defaults below were
produced by ``harness.calibrate`` over n in {10, 20}, delta in {0.1, 0.25},
400 draws per cell, Jordan-block mean profile, base seed 101.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NearDefectiveError
from .matcore import DenseMatrix, eig, op_norm
from .spectral import ConditionReport, condition_report

# Calibrated certificate constants (see module docstring).  Regenerate with
# scripts/recalibrate.py.
DEFAULT_C1 = {"real-gaussian": 0.0258, "real-uniform": 0.0217, "complex-gaussian": 0.0407}
DEFAULT_C2 = {"real-gaussian": 2.41, "real-uniform": 2.28, "complex-gaussian": 2.26}

DEFAULT_MAX_ATTEMPTS = 16


@dataclass(frozen=True)
class NoiseLaw:
    """A bounded-density sub-Gaussian scalar law with unit variance.

    ``density_bound`` is the sup of the univariate density for real laws and
    of the planar density for the complex law.
    """

    kind: str
    density_bound: float
    is_complex: bool

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.kind == "real-gaussian":
            return rng.standard_normal(shape)
        if self.kind == "real-uniform":
            return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), shape)
        # complex-gaussian: independent N(0, 1/2) real and imaginary parts
        re = rng.standard_normal(shape)
        im = rng.standard_normal(shape)
        return (re + 1j * im) * math.sqrt(0.5)


REAL_GAUSSIAN = NoiseLaw("real-gaussian", 1.0 / math.sqrt(2.0 * math.pi), False)
REAL_UNIFORM = NoiseLaw("real-uniform", 1.0 / (2.0 * math.sqrt(3.0)), False)
COMPLEX_GAUSSIAN = NoiseLaw("complex-gaussian", 1.0 / math.pi, True)

LAWS = {law.kind: law for law in (REAL_GAUSSIAN, REAL_UNIFORM, COMPLEX_GAUSSIAN)}


def law_by_name(name: str) -> NoiseLaw:
    """Only the closed catalog is accepted; arbitrary laws cannot certify a
    density bound or sub-Gaussian moment."""
    try:
        return LAWS[name]
    except KeyError:
        raise InvalidInputError(
            f"unknown noise law {name!r}; choose one of {sorted(LAWS)}"
        ) from None


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for (seed, *path); distinct paths never collide."""
    return np.random.default_rng([int(seed), *[int(p) for p in path]])


def sample_gn(law: NoiseLaw, n: int, seed: int, *path: int) -> DenseMatrix:
    """n x n matrix of iid copies of the law scaled by n^{-1/2}, so entry
    variance is 1/n and the operator norm is O(1) with high probability.
    Deterministic for fixed (law, n, seed, path)."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    rng = substream(seed, *path)
    return DenseMatrix(law.sample(rng, (n, n)) / math.sqrt(n))


def kappa_v_threshold(law: NoiseLaw, n: int, delta: float, c1: float) -> float:
    """Certificate threshold shape: c1 n^2/delta with a sqrt-log factor for
    real laws and without it for the complex law."""
    base = c1 * n * n / delta
    if law.is_complex:
        return base
    return base * math.sqrt(math.log(n / delta))


@dataclass(frozen=True)
class RegularizationResult:
    perturbation: DenseMatrix
    perturbed: DenseMatrix
    e_norm: float
    report: ConditionReport | None
    attempts: int
    succeeded: bool
    c1_threshold: float
    c2_threshold: float
    kappa_v_threshold: float

    @property
    def kappa_v_upper(self) -> float:
        return self.report.kappa_v_upper if self.report is not None else float("inf")


def _regularize_loop(
    a: DenseMatrix,
    delta: float,
    law: NoiseLaw,
    c1: float,
    c2: float,
    max_attempts: int,
    seed: int,
) -> RegularizationResult:
    if not a.is_square:
        raise InvalidInputError("regularize needs a square matrix")
    if not (0.0 < delta < 0.5):
        raise InvalidInputError(f"delta must lie in (0, 1/2), got {delta}")
    if max_attempts < 1:
        raise InvalidInputError(f"max_attempts must be >= 1, got {max_attempts}")
    nrm = op_norm(a)
    if nrm > 1.0 + 1e-12:
        raise InvalidInputError(f"||A|| must be <= 1 (got {nrm:.6g}); rescale the input")

    n = a.rows
    kv_threshold = kappa_v_threshold(law, n, delta, c1)
    best: RegularizationResult | None = None
    for attempt in range(max_attempts):
        g = sample_gn(law, n, seed, attempt)
        e = DenseMatrix(delta * g.data)
        perturbed = a + e
        e_norm = op_norm(e)
        try:
            report = condition_report(eig(perturbed))
        except NearDefectiveError:
            report = None
        ok = (
            report is not None
            and e_norm <= c2 * delta
            and report.kappa_v_upper <= kv_threshold
        )
        result = RegularizationResult(
            perturbation=e,
            perturbed=perturbed,
            e_norm=e_norm,
            report=report,
            attempts=attempt + 1,
            succeeded=ok,
            c1_threshold=c1,
            c2_threshold=c2,
            kappa_v_threshold=kv_threshold,
        )
        if ok:
            return result
        if best is None or result.kappa_v_upper < best.kappa_v_upper:
            best = result
    return RegularizationResult(
        perturbation=best.perturbation,
        perturbed=best.perturbed,
        e_norm=best.e_norm,
        report=best.report,
        attempts=max_attempts,
        succeeded=False,
        c1_threshold=c1,
        c2_threshold=c2,
        kappa_v_threshold=kv_threshold,
    )


def regularize(
    a: DenseMatrix,
    delta: float,
    law: NoiseLaw = REAL_GAUSSIAN,
    *,
    c1_threshold: float | None = None,
    c2_threshold: float | None = None,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    seed: int = 0,
) -> RegularizationResult:
    """Sample E = delta * G_n until the certificate holds (or attempts run
    out, returning the best attempt with ``succeeded=False``)."""
    if law.is_complex:
        raise InvalidInputError("regularize takes a real law; use complex_regularize")
    c1 = DEFAULT_C1[law.kind] if c1_threshold is None else float(c1_threshold)
    c2 = DEFAULT_C2[law.kind] if c2_threshold is None else float(c2_threshold)
    return _regularize_loop(a, float(delta), law, c1, c2, int(max_attempts), int(seed))


def complex_regularize(
    a: DenseMatrix,
    delta: float,
    law: NoiseLaw = COMPLEX_GAUSSIAN,
    *,
    c1_threshold: float | None = None,
    c2_threshold: float | None = None,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    seed: int = 0,
) -> RegularizationResult:
    """Same retry loop with a complex law; the certificate threshold drops
    the sqrt-log factor."""
    if not law.is_complex:
        raise InvalidInputError("complex_regularize needs the complex-gaussian law")
    c1 = DEFAULT_C1[law.kind] if c1_threshold is None else float(c1_threshold)
    c2 = DEFAULT_C2[law.kind] if c2_threshold is None else float(c2_threshold)
    return _regularize_loop(a, float(delta), law, c1, c2, int(max_attempts), int(seed))
