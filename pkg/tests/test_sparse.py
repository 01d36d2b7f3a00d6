import numpy as np
import pytest

from graphadv import SparseMatrix, ValidationError


def test_from_dense_round_trip():
    rng = np.random.default_rng(0)
    dense = rng.random((7, 5))
    dense[dense < 0.6] = 0.0
    m = SparseMatrix.from_dense(dense)
    assert np.array_equal(m.to_dense(), dense)
    assert m.nnz == np.count_nonzero(dense)


def test_identity():
    eye = SparseMatrix.identity(4)
    assert np.array_equal(eye.to_dense(), np.eye(4))


def test_csr_invariants_enforced():
    with pytest.raises(ValidationError):
        SparseMatrix(2, 2, [0, 1], [0], [1.0])  # offsets too short
    with pytest.raises(ValidationError):
        SparseMatrix(2, 2, [0, 2, 1], [0, 1], [1.0, 1.0])  # decreasing offsets
    with pytest.raises(ValidationError):
        SparseMatrix(2, 2, [0, 1, 3], [0, 1], [1.0, 1.0])  # last offset wrong
    with pytest.raises(ValidationError):
        SparseMatrix(2, 2, [0, 2, 2], [1, 0], [1.0, 1.0])  # unsorted columns
    with pytest.raises(ValidationError):
        SparseMatrix(2, 2, [0, 2, 2], [0, 0], [1.0, 1.0])  # repeated column
    with pytest.raises(ValidationError):
        SparseMatrix(1, 2, [0, 1], [2], [1.0])  # column out of range
    with pytest.raises(ValidationError):
        SparseMatrix(1, 1, [0, 1], [0], [np.inf])  # non-finite value


def test_from_coo_rejects_duplicates():
    with pytest.raises(ValidationError, match="duplicate"):
        SparseMatrix.from_coo(2, 2, [0, 0], [1, 1], [1.0, 2.0])


def test_from_coo_unsorted_input():
    m = SparseMatrix.from_coo(2, 3, [1, 0, 0], [2, 1, 0], [3.0, 2.0, 1.0])
    expected = np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 3.0]])
    assert np.array_equal(m.to_dense(), expected)


def test_matmul_dense_matches_dense_oracle():
    rng = np.random.default_rng(1)
    for _ in range(20):
        dense = rng.random((6, 8))
        dense[dense < 0.5] = 0.0
        m = SparseMatrix.from_dense(dense)
        other = rng.standard_normal((8, 3))
        assert np.allclose(m.matmul_dense(other), dense @ other)


def test_transpose():
    rng = np.random.default_rng(2)
    dense = rng.random((5, 7))
    dense[dense < 0.5] = 0.0
    m = SparseMatrix.from_dense(dense)
    assert np.array_equal(m.transpose().to_dense(), dense.T)


def test_values_are_immutable():
    m = SparseMatrix.identity(3)
    with pytest.raises(ValueError):
        m.values[0] = 5.0


def test_row_view():
    m = SparseMatrix.from_coo(3, 4, [1, 1, 2], [0, 3, 2], [1.0, 2.0, 3.0])
    cols, vals = m.row(1)
    assert cols.tolist() == [0, 3]
    assert vals.tolist() == [1.0, 2.0]
    cols0, _ = m.row(0)
    assert len(cols0) == 0
