"""Dense matrix substrate: arithmetic carriers, singular values, the
nonsymmetric eigendecomposition with biorthogonal left/right eigenvectors,
and Matrix Market dense-array file I/O.

All values are immutable after construction and safe to share between
threads; every operation is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, MatrixFormatError, NearDefectiveError

# Finite precision stands in for the exact-arithmetic assumption of distinct
# eigenvalues: pairs closer than DISTINCT_TOL_FACTOR * ||M|| are refused, and
# the spectral expansion must reconstruct M to RECON_TOL * ||M||.
DISTINCT_TOL_FACTOR = 1e-10
RECON_TOL = 1e-7


def _as_matrix_array(entries) -> np.ndarray:
    arr = np.asarray(entries)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidInputError(f"expected a nonempty 2-d array, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        arr = arr.astype(np.complex128, copy=True)
    else:
        arr = arr.astype(np.float64, copy=True)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("matrix entries must be finite (no NaN/Inf)")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DenseMatrix:
    """A real or complex dense matrix; realness is carried by the dtype."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _as_matrix_array(self.data))

    @classmethod
    def from_array(cls, entries) -> "DenseMatrix":
        return cls(entries)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.data)

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __add__(self, other: "DenseMatrix") -> "DenseMatrix":
        return DenseMatrix(self.data + other.data)

    def __sub__(self, other: "DenseMatrix") -> "DenseMatrix":
        return DenseMatrix(self.data - other.data)

    def same_entries(self, other: "DenseMatrix") -> bool:
        return self.data.shape == other.data.shape and bool(
            np.array_equal(self.data, other.data)
        )


@dataclass(frozen=True)
class SingularValues:
    """Full singular spectrum, descending: sigma_1 >= ... >= sigma_n >= 0."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def largest(self) -> float:
        return float(self.values[0])

    @property
    def smallest(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues with unit-norm right eigenvectors v_i (columns of
    ``right_vectors``) and left eigenvectors w_i (columns of ``left_vectors``)
    normalized so that w_i^H v_i = 1.  M = sum_i lambda_i v_i w_i^H."""

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    source_norm: float

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=np.complex128)
        V = np.asarray(self.right_vectors, dtype=np.complex128)
        W = np.asarray(self.left_vectors, dtype=np.complex128)
        for a in (lam, V, W):
            a.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "right_vectors", V)
        object.__setattr__(self, "left_vectors", W)
        object.__setattr__(self, "source_norm", float(self.source_norm))

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


def _require_square(m: DenseMatrix, op: str) -> np.ndarray:
    if not m.is_square:
        raise InvalidInputError(f"{op} requires a square matrix, got {m.rows}x{m.cols}")
    return m.data


def singular_values(m: DenseMatrix) -> SingularValues:
    """All singular values of a square matrix, descending."""
    arr = _require_square(m, "singular_values")
    return SingularValues(np.linalg.svd(arr, compute_uv=False))


def op_norm(m: DenseMatrix) -> float:
    """The l2->l2 operator norm, i.e. the largest singular value."""
    return singular_values(m).largest


def _min_pairwise_gap(lam: np.ndarray) -> float:
    d = np.abs(lam[:, None] - lam[None, :])
    np.fill_diagonal(d, np.inf)
    return float(d.min())


def eig(m: DenseMatrix) -> SpectralDecomposition:
    """Spectral expansion M = sum_i lambda_i v_i w_i^H for a matrix with
    numerically distinct eigenvalues.

    Right eigenvectors come back with unit 2-norm; left eigenvectors are read
    off the rows of V^{-1} (so biorthogonality w_i^H v_j = delta_ij holds by
    construction).  Real input is diagonalized as real, keeping conjugate
    eigenvalue pairs adjacent, then promoted to complex.

    Raises NearDefectiveError when an eigenvalue pair is closer than
    DISTINCT_TOL_FACTOR * ||M|| or the expansion fails to reconstruct M to
    RECON_TOL * ||M||.
    """
    arr = _require_square(m, "eig")
    nrm = op_norm(m)
    lam, V = np.linalg.eig(arr)
    lam = lam.astype(np.complex128)
    V = V.astype(np.complex128)
    # LAPACK already returns unit columns; renormalize to pin the invariant.
    V = V / np.linalg.norm(V, axis=0, keepdims=True)

    if m.rows > 1:
        gap = _min_pairwise_gap(lam)
        if gap < DISTINCT_TOL_FACTOR * max(nrm, np.finfo(np.float64).tiny):
            raise NearDefectiveError(
                f"eigenvalue pair at distance {gap:.3e} below the distinctness "
                f"threshold {DISTINCT_TOL_FACTOR:.0e}*||M||",
                gap,
            )

    try:
        W_rows = np.linalg.inv(V)
    except np.linalg.LinAlgError as exc:
        raise NearDefectiveError(f"eigenvector matrix is singular: {exc}", 0.0) from exc

    resid = np.linalg.norm((V * lam) @ W_rows - arr, ord=2)
    if resid > RECON_TOL * max(nrm, np.finfo(np.float64).tiny):
        raise NearDefectiveError(
            f"spectral expansion residual {resid:.3e} exceeds "
            f"{RECON_TOL:.0e}*||M||; matrix is numerically defective",
            resid,
        )

    return SpectralDecomposition(
        eigenvalues=lam,
        right_vectors=V,
        left_vectors=W_rows.conj().T,
        source_norm=nrm,
    )


# ---------------------------------------------------------------------------
# Matrix Market dense "array" format, fields real/complex, general symmetry.
# Entries are written in column-major order with repr()-exact decimals, so a
# write/read round trip reproduces every float bit for bit.
# ---------------------------------------------------------------------------

_MM_HEADER = "%%MatrixMarket matrix array {field} general"


def write_matrix(m: DenseMatrix, path) -> None:
    field_name = "complex" if m.is_complex else "real"
    lines = [_MM_HEADER.format(field=field_name), f"{m.rows} {m.cols}"]
    flat = m.data.flatten(order="F")
    if m.is_complex:
        lines.extend(f"{float(z.real)!r} {float(z.imag)!r}" for z in flat)
    else:
        lines.extend(repr(float(x)) for x in flat)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_matrix(path) -> DenseMatrix:
    with open(path, "r", encoding="ascii") as fh:
        raw = fh.read().splitlines()

    if not raw:
        raise MatrixFormatError("empty file", 1)
    head = raw[0].split()
    if (
        len(head) != 5
        or head[0].lower() != "%%matrixmarket"
        or head[1].lower() != "matrix"
        or head[2].lower() != "array"
        or head[4].lower() != "general"
    ):
        raise MatrixFormatError(
            "expected header '%%MatrixMarket matrix array <real|complex> general'", 1
        )
    field_name = head[3].lower()
    if field_name not in ("real", "complex"):
        raise MatrixFormatError(f"unsupported field {field_name!r}", 1)

    idx = 1
    while idx < len(raw) and raw[idx].lstrip().startswith("%"):
        idx += 1
    if idx >= len(raw):
        raise MatrixFormatError("missing size line", len(raw))
    lineno = idx + 1
    dims = raw[idx].split()
    if len(dims) != 2:
        raise MatrixFormatError("size line must be '<rows> <cols>'", lineno)
    try:
        rows, cols = int(dims[0]), int(dims[1])
    except ValueError:
        raise MatrixFormatError("size line must hold two integers", lineno) from None
    if rows <= 0 or cols <= 0:
        raise InvalidInputError(f"matrix dimensions must be positive, got {rows}x{cols}")

    need = rows * cols
    values = []
    for off, line in enumerate(raw[idx + 1 :]):
        lineno = idx + 2 + off
        text = line.strip()
        if not text or text.startswith("%"):
            continue
        parts = text.split()
        try:
            if field_name == "real":
                if len(parts) != 1:
                    raise ValueError("expected one value per line")
                values.append(float(parts[0]))
            else:
                if len(parts) != 2:
                    raise ValueError("expected 're im' per line")
                values.append(complex(float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise MatrixFormatError(str(exc), lineno) from None
        if len(values) > need:
            raise MatrixFormatError(f"more than {need} entries", lineno)
    if len(values) != need:
        raise InvalidInputError(
            f"dimension mismatch: header promises {need} entries, file holds {len(values)}"
        )

    dtype = np.complex128 if field_name == "complex" else np.float64
    arr = np.array(values, dtype=dtype).reshape((cols, rows)).T
    return DenseMatrix(arr)
