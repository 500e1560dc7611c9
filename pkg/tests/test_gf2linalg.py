import numpy as np
import pytest

from main_logic.errors import IntegrityError
from main_logic.gf2linalg import SparseBitMatrix, homology_dims, rank


def naive_rank(array) -> int:
    """逐列消元的朴素 GF(2) 秩（测试用的独立实现）"""
    work = np.array(array, dtype=np.uint8) % 2
    rows, cols = work.shape
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if work[i, c]), None)
        if pivot is None:
            continue
        work[[r, pivot]] = work[[pivot, r]]
        for i in range(rows):
            if i != r and work[i, c]:
                work[i] ^= work[r]
        r += 1
        if r == rows:
            break
    return r


def random_matrix(rng, rows, cols, density=0.5) -> np.ndarray:
    return (rng.random((rows, cols)) < density).astype(np.uint8)


def test_rank_small_cases():
    assert rank(SparseBitMatrix(0, 0)) == 0
    assert rank(SparseBitMatrix.identity(5)) == 5
    assert rank(SparseBitMatrix.zero(3, 7)) == 0
    assert rank(SparseBitMatrix(2, 2, [(0, 1), (0, 1)])) == 1


def test_duplicate_entries_cancel():
    matrix = SparseBitMatrix(1, 3, [(0, 2, 2)])
    assert matrix.row_indices() == [(0,)]


def test_column_index_out_of_range():
    with pytest.raises(ValueError):
        SparseBitMatrix(1, 2, [(2,)])


@pytest.mark.parametrize("seed", range(5))
def test_rank_matches_naive_oracle(seed):
    rng = np.random.default_rng(seed)
    array = random_matrix(rng, 64, 64)
    assert rank(SparseBitMatrix.from_dense(array)) == naive_rank(array)


@pytest.mark.parametrize("seed", range(3))
def test_rank_across_word_boundaries(seed):
    rng = np.random.default_rng(100 + seed)
    array = random_matrix(rng, 150, 200, density=0.03)
    matrix = SparseBitMatrix.from_dense(array)
    assert np.array_equal(matrix.to_dense(), array)
    assert matrix.to_words().shape == (150, 4)
    assert rank(matrix) == naive_rank(array)


def test_from_coo_cancels_pairs():
    matrix = SparseBitMatrix.from_coo(2, 70, [0, 0, 1, 1, 1], [69, 69, 3, 64, 3])
    assert matrix.row_indices() == [(), (64,)]
    assert matrix.nnz == 1


@pytest.mark.parametrize("seed", range(4))
def test_compose_matches_matrix_product(seed):
    rng = np.random.default_rng(500 + seed)
    first = random_matrix(rng, 90, 30, density=0.1)
    second = random_matrix(rng, 12, 90, density=0.1)
    expected = (second.astype(np.int64) @ first.astype(np.int64)) % 2
    got = SparseBitMatrix.from_dense(second).compose(SparseBitMatrix.from_dense(first))
    assert np.array_equal(got.to_dense(), expected)


@pytest.mark.parametrize("seed", range(5))
def test_rank_of_transpose(seed):
    rng = np.random.default_rng(200 + seed)
    matrix = SparseBitMatrix.from_dense(random_matrix(rng, 30, 45, density=0.2))
    assert rank(matrix) == rank(matrix.transpose())


@pytest.mark.parametrize("seed", range(5))
def test_rank_invariant_under_row_operations(seed):
    rng = np.random.default_rng(300 + seed)
    array = random_matrix(rng, 20, 25, density=0.3)
    expected = rank(SparseBitMatrix.from_dense(array))
    shuffled = array[rng.permutation(array.shape[0])]
    shuffled[0] ^= shuffled[1]
    assert rank(SparseBitMatrix.from_dense(shuffled)) == expected


def test_compose():
    first = SparseBitMatrix.from_dense([[1, 0], [1, 1], [0, 1]])
    second = SparseBitMatrix.from_dense([[1, 1, 1]])
    assert second.compose(first).to_dense().tolist() == [[0, 0]]
    with pytest.raises(IntegrityError):
        first.compose(first)


def test_homology_dims_examples():
    assert homology_dims(SparseBitMatrix.zero(4, 0), SparseBitMatrix.zero(0, 4)) == 4
    assert homology_dims(SparseBitMatrix.zero(3, 2), SparseBitMatrix.identity(3)) == 0


def test_homology_dims_rejects_bad_input():
    with pytest.raises(IntegrityError):
        homology_dims(SparseBitMatrix.zero(3, 1), SparseBitMatrix.zero(1, 4))
    nonzero = SparseBitMatrix.identity(2)
    with pytest.raises(IntegrityError):
        homology_dims(nonzero, nonzero)


@pytest.mark.parametrize("seed", range(8))
def test_homology_dims_matches_naive_oracle(seed):
    rng = np.random.default_rng(400 + seed)
    a, b = rng.integers(1, 16, size=2)
    p, q = rng.integers(1, 16, size=2)
    # C_i = A ⊕ B，d_in 落在 A 中，d_out 只读 B 分量，因而 d_out ∘ d_in = 0
    d_in = np.vstack([random_matrix(rng, a, p), np.zeros((b, p), dtype=np.uint8)])
    d_out = np.hstack([np.zeros((q, a), dtype=np.uint8), random_matrix(rng, q, b)])
    order = rng.permutation(a + b)
    d_in, d_out = d_in[order], d_out[:, order]
    expected = (a + b) - naive_rank(d_out) - naive_rank(d_in)
    got = homology_dims(SparseBitMatrix.from_dense(d_in), SparseBitMatrix.from_dense(d_out))
    assert got == expected


def test_euler_characteristic_telescopes():
    rng = np.random.default_rng(7)
    # 0 → C0 → C1 → C2 → 0，d1 ∘ d0 = 0
    d0 = np.vstack([random_matrix(rng, 3, 4), np.zeros((2, 4), dtype=np.uint8)])
    d1 = np.hstack([np.zeros((6, 3), dtype=np.uint8), random_matrix(rng, 6, 2)])
    maps = [
        SparseBitMatrix.zero(4, 0),
        SparseBitMatrix.from_dense(d0),
        SparseBitMatrix.from_dense(d1),
        SparseBitMatrix.zero(0, 6),
    ]
    dims = [4, 5, 6]
    homology = [homology_dims(maps[i], maps[i + 1]) for i in range(3)]
    assert sum((-1) ** i * d for i, d in enumerate(dims)) == sum(
        (-1) ** i * h for i, h in enumerate(homology)
    )


def test_rank_of_large_bidiagonal():
    # 单元素列逐层剥离即可求出满秩
    size = 3000
    diagonal = np.arange(size)
    matrix = SparseBitMatrix.from_coo(
        size, size, np.concatenate([diagonal, diagonal[1:]]), np.concatenate([diagonal, diagonal[:-1]])
    )
    assert rank(matrix) == size


@pytest.mark.parametrize("seed", range(3))
def test_rank_with_dense_core(seed):
    rng = np.random.default_rng(600 + seed)
    core = random_matrix(rng, 40, 40)
    array = np.zeros((100, 90), dtype=np.uint8)
    array[:40, :40] = core
    array[40:90, 40:90] = np.eye(50, dtype=np.uint8)
    array[40:90, :40] = random_matrix(rng, 50, 40, density=0.2)
    assert rank(SparseBitMatrix.from_dense(array)) == naive_rank(array)
