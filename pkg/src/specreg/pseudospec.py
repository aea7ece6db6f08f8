"""Grid-based epsilon-pseudospectrum membership and region-volume estimation.

The pseudospectrum Lambda_eps(M) = {z : sigma_min(M - zI) <= eps} is sampled
at cell centers of a uniform grid.  Because sigma_min(M - zI) is 1-Lipschitz
in z, a cell's classification can only flip when |sigma_min(center) - eps| is
at most half the cell diagonal; counting those cells (plus cells straddling
the region boundary) gives a rigorous volume bracket.

The cell-volume ratio vol(Lambda_eps cap B)/(pi eps^2) converges, as
eps -> 0, to the sum of squared eigenvalue condition numbers over the
eigenvalues inside B; ``vol_limit_check`` exhibits the convergence trend over
a descending eps list, and ``vol_bound_check`` verifies the finite-eps volume
lower bound (pi/8) kappa_2^2 at eps = eta / (2 n kappa_2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ResolutionError
from .matcore import DenseMatrix, eig, op_norm
from .spectral import eigenvalue_condition_numbers, eigenvalue_gap, kappa2

MIN_RESOLUTION = 8
MAX_RESOLUTION = 4096
# A grid is considered able to resolve eps only when cell diameter <= eps/4.
VALID_DIAM_FACTOR = 4.0

# Batch size for the vectorized sigma_min sweep (bounds peak memory).
_SVD_BATCH = 65536


@dataclass(frozen=True)
class GridRegion:
    """A disc or axis-aligned rectangle sampled at ``resolution`` cells per
    axis (over the disc's bounding square for discs)."""

    resolution: int
    center: complex | None = None
    radius: float | None = None
    corner_lo: complex | None = None
    corner_hi: complex | None = None

    def __post_init__(self):
        res = int(self.resolution)
        if res < MIN_RESOLUTION:
            raise InvalidInputError(f"resolution must be >= {MIN_RESOLUTION}, got {res}")
        if res > MAX_RESOLUTION:
            raise InvalidInputError(f"resolution must be <= {MAX_RESOLUTION}, got {res}")
        object.__setattr__(self, "resolution", res)
        if self.is_disc:
            if not (self.radius and self.radius > 0):
                raise InvalidInputError("disc region needs a positive radius")
            object.__setattr__(self, "center", complex(self.center))
            object.__setattr__(self, "radius", float(self.radius))
        else:
            if self.corner_lo is None or self.corner_hi is None:
                raise InvalidInputError("region needs either center+radius or two corners")
            lo, hi = complex(self.corner_lo), complex(self.corner_hi)
            if not (hi.real > lo.real and hi.imag > lo.imag):
                raise InvalidInputError("rectangle region must have positive area")
            object.__setattr__(self, "corner_lo", lo)
            object.__setattr__(self, "corner_hi", hi)

    @classmethod
    def disc(cls, center, radius, resolution) -> "GridRegion":
        return cls(resolution=resolution, center=complex(center), radius=float(radius))

    @classmethod
    def rectangle(cls, corner_lo, corner_hi, resolution) -> "GridRegion":
        return cls(resolution=resolution, corner_lo=corner_lo, corner_hi=corner_hi)

    @property
    def is_disc(self) -> bool:
        return self.center is not None and self.radius is not None

    @property
    def _bbox(self) -> tuple[float, float, float, float]:
        if self.is_disc:
            c, r = self.center, self.radius
            return c.real - r, c.real + r, c.imag - r, c.imag + r
        lo, hi = self.corner_lo, self.corner_hi
        return lo.real, hi.real, lo.imag, hi.imag

    @property
    def cell_width(self) -> float:
        x0, x1, _, _ = self._bbox
        return (x1 - x0) / self.resolution

    @property
    def cell_height(self) -> float:
        _, _, y0, y1 = self._bbox
        return (y1 - y0) / self.resolution

    @property
    def cell_area(self) -> float:
        return self.cell_width * self.cell_height

    @property
    def cell_diameter(self) -> float:
        return float(np.hypot(self.cell_width, self.cell_height))

    def cell_centers(self) -> np.ndarray:
        """Centers of the grid cells that belong to the region."""
        x0, x1, y0, y1 = self._bbox
        xs = x0 + (np.arange(self.resolution) + 0.5) * self.cell_width
        ys = y0 + (np.arange(self.resolution) + 0.5) * self.cell_height
        X, Y = np.meshgrid(xs, ys)
        zs = (X + 1j * Y).ravel()
        if self.is_disc:
            zs = zs[np.abs(zs - self.center) <= self.radius]
        return zs

    def boundary_distance(self, zs: np.ndarray) -> np.ndarray:
        """Distance from each point to the region boundary."""
        if self.is_disc:
            return np.abs(self.radius - np.abs(zs - self.center))
        x0, x1, y0, y1 = self._bbox
        dx = np.minimum(zs.real - x0, x1 - zs.real)
        dy = np.minimum(zs.imag - y0, y1 - zs.imag)
        return np.minimum(dx, dy)

    @property
    def area(self) -> float:
        """Region area as measured by the grid (cells in region x cell area)."""
        return len(self.cell_centers()) * self.cell_area


@dataclass(frozen=True)
class PseudospectrumEstimate:
    epsilon: float
    inside_cells: int
    cell_area: float
    volume: float
    volume_error_bound: float


def sigma_min_shifted(m: DenseMatrix, zs: np.ndarray) -> np.ndarray:
    """sigma_min(M - zI) for every z in ``zs``, batched."""
    arr = m.data.astype(np.complex128, copy=False)
    n = arr.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    out = np.empty(len(zs), dtype=np.float64)
    for i in range(0, len(zs), _SVD_BATCH):
        chunk = np.asarray(zs[i : i + _SVD_BATCH], dtype=np.complex128)
        stack = arr[None, :, :] - chunk[:, None, None] * eye[None, :, :]
        out[i : i + len(chunk)] = np.linalg.svd(stack, compute_uv=False)[:, -1]
    return out


def in_pseudospectrum(m: DenseMatrix, z: complex, epsilon: float) -> bool:
    """z lies in Lambda_eps(M), i.e. sigma_min(M - zI) <= eps."""
    if epsilon < 0:
        raise InvalidInputError("epsilon must be nonnegative")
    sig = sigma_min_shifted(m, np.array([complex(z)]))
    return bool(sig[0] <= epsilon)


def _estimate_from_field(
    region: GridRegion, zs: np.ndarray, sigmas: np.ndarray, epsilon: float
) -> PseudospectrumEstimate:
    half_diag = 0.5 * region.cell_diameter
    inside = sigmas <= epsilon
    # Cells whose center classification could flip within the Lipschitz
    # bound, plus inside cells straddling the region boundary.
    uncertain = np.abs(sigmas - epsilon) <= half_diag
    uncertain |= inside & (region.boundary_distance(zs) <= half_diag)
    count = int(inside.sum())
    return PseudospectrumEstimate(
        epsilon=float(epsilon),
        inside_cells=count,
        cell_area=region.cell_area,
        volume=count * region.cell_area,
        volume_error_bound=int(uncertain.sum()) * region.cell_area,
    )


def pseudospectrum_volume(
    m: DenseMatrix, region: GridRegion, epsilon: float
) -> PseudospectrumEstimate:
    """vol(Lambda_eps(M) cap region) by cell-center sampling; deterministic."""
    if epsilon <= 0:
        raise InvalidInputError("epsilon must be positive")
    _require_square(m)
    zs = region.cell_centers()
    sigmas = sigma_min_shifted(m, zs)
    return _estimate_from_field(region, zs, sigmas, epsilon)


def _require_square(m: DenseMatrix) -> None:
    if not m.is_square:
        raise InvalidInputError("pseudospectrum operations need a square matrix")


@dataclass(frozen=True)
class VolLimitResult:
    epsilons: tuple
    ratios: tuple
    estimates: tuple
    target: float

    def csv_rows(self) -> list[tuple]:
        """(epsilon, volume, error_bound, ratio, target) per epsilon."""
        return [
            (e.epsilon, e.volume, e.volume_error_bound, r, self.target)
            for e, r in zip(self.estimates, self.ratios)
        ]


def vol_limit_check(m: DenseMatrix, region: GridRegion, epsilons) -> VolLimitResult:
    """Ratios vol(Lambda_eps cap B)/(pi eps^2) over a descending eps list,
    next to their limit target sum of kappa(lambda_i)^2 over lambda_i in B."""
    eps_list = [float(e) for e in epsilons]
    if not eps_list or any(e <= 0 for e in eps_list):
        raise InvalidInputError("epsilons must be a nonempty positive list")
    if not all(a > b for a, b in zip(eps_list, eps_list[1:])):
        raise InvalidInputError("epsilons must be strictly descending")
    smallest = min(eps_list)
    if region.cell_diameter > smallest / VALID_DIAM_FACTOR:
        need = int(np.ceil(region.resolution * region.cell_diameter * VALID_DIAM_FACTOR / smallest))
        raise ResolutionError(
            f"cell diameter {region.cell_diameter:.3e} exceeds eps/4 for eps={smallest:.3e}; "
            f"refine the region to >= {need} cells per axis or raise eps"
        )

    dec = eig(m)
    kappas = eigenvalue_condition_numbers(dec)
    lam = dec.eigenvalues
    if region.is_disc:
        member = np.abs(lam - region.center) <= region.radius
    else:
        lo, hi = region.corner_lo, region.corner_hi
        member = (
            (lam.real >= lo.real)
            & (lam.real <= hi.real)
            & (lam.imag >= lo.imag)
            & (lam.imag <= hi.imag)
        )
    target = float(np.sum(kappas[member] ** 2))

    zs = region.cell_centers()
    sigmas = sigma_min_shifted(m, zs)
    estimates = tuple(_estimate_from_field(region, zs, sigmas, e) for e in eps_list)
    ratios = tuple(est.volume / (np.pi * est.epsilon**2) for est in estimates)
    return VolLimitResult(
        epsilons=tuple(eps_list), ratios=ratios, estimates=estimates, target=target
    )


@dataclass(frozen=True)
class VolBoundResult:
    passed: bool
    lhs: float
    rhs: float
    epsilon: float
    volume: float
    volume_error_bound: float
    kappa2: float
    gap: float


# Local counting grids: cells of side eps/(16 sqrt(2)) restricted to discs of
# radius 1.25 kappa_i eps around each eigenvalue.  At eps = eta/(2 n kappa_2)
# those discs are pairwise disjoint and lie inside D(0, 2||M||) up to the
# clipping applied below, so summing cell counts never double counts and can
# only undercount vol(Lambda_eps cap D(0, 2||M||)) - which is safe for a
# volume *lower* bound check.
_LOCAL_REFINE = 4.0
_LOCAL_RADIUS_FACTOR = 1.25


def vol_bound_check(m: DenseMatrix) -> VolBoundResult:
    """Check vol(Lambda_eps(M) cap D(0, 2||M||)) / eps^2 >= (pi/8) kappa_2^2
    at eps = eta(M) / (2 n kappa_2(M))."""
    _require_square(m)
    n = m.rows
    if n < 2:
        raise InvalidInputError("volume bound check needs n >= 2")
    dec = eig(m)
    kappas = eigenvalue_condition_numbers(dec)
    k2 = kappa2(dec)
    eta = eigenvalue_gap(dec)
    eps = eta / (2 * n * k2)
    nrm = op_norm(m)

    h = eps / (VALID_DIAM_FACTOR * np.sqrt(2)) / _LOCAL_REFINE
    count = 0
    uncertain = 0
    half_diag = h * np.sqrt(2) / 2
    for lam_i, kap_i in zip(dec.eigenvalues, kappas):
        r = _LOCAL_RADIUS_FACTOR * kap_i * eps
        cells = int(np.ceil(2 * r / h))
        if cells > MAX_RESOLUTION:
            raise ResolutionError(
                f"local grid for kappa={kap_i:.1f} needs {cells} cells per axis "
                f"(> {MAX_RESOLUTION}); epsilon {eps:.3e} is not resolvable"
            )
        xs = lam_i.real - r + (np.arange(cells) + 0.5) * h
        ys = lam_i.imag - r + (np.arange(cells) + 0.5) * h
        X, Y = np.meshgrid(xs, ys)
        zs = (X + 1j * Y).ravel()
        zs = zs[(np.abs(zs - lam_i) <= r) & (np.abs(zs) <= 2 * nrm)]
        if len(zs) == 0:
            continue
        sigmas = sigma_min_shifted(m, zs)
        count += int((sigmas <= eps).sum())
        uncertain += int((np.abs(sigmas - eps) <= half_diag).sum())

    volume = count * h * h
    lhs = volume / eps**2
    rhs = np.pi / 8 * k2**2
    return VolBoundResult(
        passed=bool(lhs >= rhs),
        lhs=float(lhs),
        rhs=float(rhs),
        epsilon=float(eps),
        volume=float(volume),
        volume_error_bound=float(uncertain * h * h),
        kappa2=float(k2),
        gap=float(eta),
    )
