import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specreg.errors import InvalidInputError, MatrixFormatError, NearDefectiveError
from specreg.matcore import (
    DenseMatrix,
    eig,
    op_norm,
    read_matrix,
    singular_values,
    write_matrix,
)

from conftest import random_complex, random_unitary
from oracles import jacobi_hermitian_eigenvalues, power_iteration_norm


class TestDenseMatrix:
    def test_real_tag(self):
        m = DenseMatrix([[1.0, 2.0], [3.0, 4.0]])
        assert not m.is_complex and m.rows == 2 and m.cols == 2

    def test_complex_tag(self):
        m = DenseMatrix(np.array([[1j, 0], [0, 1]]))
        assert m.is_complex

    def test_rejects_nan(self):
        with pytest.raises(InvalidInputError):
            DenseMatrix([[np.nan, 0.0], [0.0, 1.0]])

    def test_rejects_inf(self):
        with pytest.raises(InvalidInputError):
            DenseMatrix([[np.inf, 0.0], [0.0, 1.0]])

    def test_entries_frozen(self):
        m = DenseMatrix([[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(ValueError):
            m.data[0, 0] = 5.0


class TestOpNorm:
    def test_identity(self):
        assert op_norm(DenseMatrix(np.eye(3))) == pytest.approx(1.0, rel=1e-12)

    def test_nilpotent_jordan_2x2(self):
        assert op_norm(DenseMatrix([[0.0, 1.0], [0.0, 0.0]])) == pytest.approx(1.0, rel=1e-12)

    def test_matches_power_iteration_oracle(self, rng):
        arr = rng.standard_normal((8, 8))
        got = op_norm(DenseMatrix(arr))
        want = power_iteration_norm(arr)
        assert got == pytest.approx(want, rel=1e-8)

    def test_rejects_nonsquare(self):
        with pytest.raises(InvalidInputError):
            op_norm(DenseMatrix(np.ones((2, 3))))

    def test_equals_first_singular_value(self, rng):
        m = DenseMatrix(rng.standard_normal((5, 5)))
        assert op_norm(m) == singular_values(m).largest


class TestSingularValues:
    def test_diagonal(self):
        sv = singular_values(DenseMatrix(np.diag([1.0, 2.0, 3.0])))
        assert np.allclose(sv.values, [3.0, 2.0, 1.0])

    def test_rank_one_nilpotent(self):
        sv = singular_values(DenseMatrix([[0.0, 1.0], [0.0, 0.0]]))
        assert np.allclose(sv.values, [1.0, 0.0])

    def test_matches_jacobi_oracle_complex(self, rng):
        arr = random_complex(rng, 6)
        got = singular_values(DenseMatrix(arr)).values
        gram_eigs = jacobi_hermitian_eigenvalues(arr.conj().T @ arr)
        want = np.sqrt(np.maximum(gram_eigs[::-1], 0.0))
        assert np.allclose(got, want, rtol=1e-8, atol=1e-10)

    def test_product_equals_abs_det(self, rng):
        arr = rng.standard_normal((6, 6))
        sv = singular_values(DenseMatrix(arr)).values
        assert np.prod(sv) == pytest.approx(abs(np.linalg.det(arr)), rel=1e-8)

    def test_descending(self, rng):
        sv = singular_values(DenseMatrix(random_complex(rng, 7))).values
        assert np.all(np.diff(sv) <= 0) and np.all(sv >= 0)

    def test_unitary_invariance(self, rng):
        arr = random_complex(rng, 5)
        u = random_unitary(rng, 5)
        v = random_unitary(rng, 5)
        a = singular_values(DenseMatrix(arr)).values
        b = singular_values(DenseMatrix(u @ arr @ v)).values
        assert np.allclose(a, b, rtol=1e-8)


class TestEig:
    def test_diagonal(self):
        dec = eig(DenseMatrix(np.diag([1.0, 2.0])))
        order = np.argsort(dec.eigenvalues.real)
        assert np.allclose(dec.eigenvalues[order], [1.0, 2.0])
        assert np.allclose(np.abs(dec.right_vectors), np.eye(2))
        assert np.allclose(np.abs(dec.left_vectors), np.eye(2))

    def test_rotation_generator(self):
        dec = eig(DenseMatrix([[0.0, -1.0], [1.0, 0.0]]))
        assert sorted(np.round(dec.eigenvalues.imag, 12)) == [-1.0, 1.0]
        assert np.allclose(dec.eigenvalues.real, 0.0, atol=1e-12)

    def test_conjugate_closed_order_for_real_input(self, rng):
        dec = eig(DenseMatrix(rng.standard_normal((6, 6))))
        lam = dec.eigenvalues
        # complex eigenvalues of a real matrix come in adjacent conjugate pairs
        i = 0
        while i < len(lam):
            if abs(lam[i].imag) > 1e-12:
                assert lam[i + 1] == pytest.approx(np.conj(lam[i]), rel=1e-12)
                i += 2
            else:
                i += 1

    def test_triangular_closed_form(self):
        dec = eig(DenseMatrix([[1.0, 1.0], [0.0, 2.0]]))
        order = np.argsort(dec.eigenvalues.real)
        assert np.allclose(dec.eigenvalues[order], [1.0, 2.0])
        w_norms = np.linalg.norm(dec.left_vectors, axis=0)[order]
        assert np.allclose(w_norms, [np.sqrt(2.0), np.sqrt(2.0)], rtol=1e-10)

    def test_repeated_eigenvalues_raise(self):
        with pytest.raises(NearDefectiveError) as info:
            eig(DenseMatrix(np.eye(3)))
        assert info.value.gap == pytest.approx(0.0, abs=1e-12)

    def test_defective_jordan_raises(self):
        with pytest.raises(NearDefectiveError):
            eig(DenseMatrix([[2.0, 1.0], [0.0, 2.0]]))

    def _check_invariants(self, arr):
        m = DenseMatrix(arr)
        dec = eig(m)
        nrm = op_norm(m)
        lam, V, W = dec.eigenvalues, dec.right_vectors, dec.left_vectors
        assert np.allclose(np.linalg.norm(V, axis=0), 1.0, atol=1e-12)
        # right and left residuals
        assert np.linalg.norm(m.data @ V - V * lam, axis=0).max() <= 1e-8 * nrm
        w_norms = np.linalg.norm(W, axis=0)
        left_resid = np.linalg.norm(
            W.conj().T @ m.data - lam[:, None] * W.conj().T, axis=1
        )
        assert np.all(left_resid <= 1e-8 * nrm * w_norms)
        # biorthogonality
        gram = W.conj().T @ V
        scale = np.maximum(1.0, w_norms)[:, None]
        assert np.all(np.abs(gram - np.eye(dec.n)) <= 1e-8 * scale)
        # spectrum inside the norm disc
        assert np.all(np.abs(lam) <= nrm * (1.0 + 1e-8))
        # reconstruction
        recon = (V * lam) @ W.conj().T
        assert np.linalg.norm(recon - m.data, ord=2) <= 1e-7 * nrm

    @settings(max_examples=25, deadline=None)
    @given(n=st.integers(2, 8), seed=st.integers(0, 10_000), cplx=st.booleans())
    def test_invariants_random(self, n, seed, cplx):
        r = np.random.default_rng(seed)
        arr = r.standard_normal((n, n))
        if cplx:
            arr = arr + 1j * r.standard_normal((n, n))
        self._check_invariants(arr)

    def test_invariants_perturbed_jordan(self, rng):
        n = 12
        arr = np.zeros((n, n))
        arr[np.arange(n - 1), np.arange(1, n)] = 1.0
        arr = arr + 0.05 * rng.standard_normal((n, n)) / np.sqrt(n)
        self._check_invariants(arr)


class TestMatrixMarketIO(object):
    def test_round_trip_real(self, tmp_path):
        m = DenseMatrix(np.diag([1.0, 2.0, 3.0]))
        path = tmp_path / "d.mtx"
        write_matrix(m, path)
        assert read_matrix(path).same_entries(m)

    def test_round_trip_exact_bits(self, tmp_path, rng):
        m = DenseMatrix(rng.standard_normal((4, 3)))
        path = tmp_path / "r.mtx"
        write_matrix(m, path)
        assert read_matrix(path).same_entries(m)

    def test_round_trip_complex(self, tmp_path, rng):
        m = DenseMatrix(random_complex(rng, 3))
        path = tmp_path / "c.mtx"
        write_matrix(m, path)
        back = read_matrix(path)
        assert back.is_complex and back.same_entries(m)

    def test_one_by_one(self, tmp_path):
        path = tmp_path / "s.mtx"
        path.write_text("%%MatrixMarket matrix array real general\n1 1\n5\n")
        m = read_matrix(path)
        assert m.rows == 1 and m.data[0, 0] == 5.0

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "bad.mtx"
        path.write_text("%%MatrixMarket matrix coordinate real general\n1 1\n5\n")
        with pytest.raises(MatrixFormatError) as info:
            read_matrix(path)
        assert info.value.line == 1

    def test_bad_entry_reports_line(self, tmp_path):
        path = tmp_path / "bad.mtx"
        path.write_text("%%MatrixMarket matrix array real general\n2 1\n1.0\npotato\n")
        with pytest.raises(MatrixFormatError) as info:
            read_matrix(path)
        assert info.value.line == 4

    def test_missing_entries_is_dimension_error(self, tmp_path):
        path = tmp_path / "short.mtx"
        path.write_text("%%MatrixMarket matrix array real general\n2 2\n1.0\n2.0\n")
        with pytest.raises(InvalidInputError):
            read_matrix(path)

    def test_column_major_layout(self, tmp_path):
        path = tmp_path / "cm.mtx"
        path.write_text(
            "%%MatrixMarket matrix array real general\n2 2\n1.0\n2.0\n3.0\n4.0\n"
        )
        m = read_matrix(path)
        assert np.array_equal(m.data, [[1.0, 3.0], [2.0, 4.0]])

    @settings(max_examples=20, deadline=None)
    @given(
        rows=st.integers(1, 5),
        cols=st.integers(1, 5),
        seed=st.integers(0, 10_000),
        cplx=st.booleans(),
    )
    def test_round_trip_property(self, rows, cols, seed, cplx):
        import tempfile

        r = np.random.default_rng(seed)
        arr = r.standard_normal((rows, cols)) * 10.0 ** r.integers(-8, 8)
        if cplx:
            arr = arr + 1j * r.standard_normal((rows, cols))
        m = DenseMatrix(arr)
        with tempfile.TemporaryDirectory() as d:
            path = f"{d}/p.mtx"
            write_matrix(m, path)
            assert read_matrix(path).same_entries(m)
