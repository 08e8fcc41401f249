import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unlearn_eval.cka import (
    DegenerateInputError,
    EmbeddingMatrix,
    cka_table,
    find_matrices,
    linear_cka,
    read_matrix,
    write_matrix,
)


def brute_cka(x, y):
    """Kernel form with explicit loops: HSIC on centered n-by-n Gram matrices."""
    x, y = [list(map(float, r)) for r in x], [list(map(float, r)) for r in y]
    n = len(x)
    k = [[sum(a * b for a, b in zip(x[i], x[j])) for j in range(n)] for i in range(n)]
    l = [[sum(a * b for a, b in zip(y[i], y[j])) for j in range(n)] for i in range(n)]

    def center(g):
        rows = [sum(r) / n for r in g]
        cols = [sum(g[i][j] for i in range(n)) / n for j in range(n)]
        tot = sum(rows) / n
        return [[g[i][j] - rows[i] - cols[j] + tot for j in range(n)] for i in range(n)]

    kc, lc = center(k), center(l)

    def hsic(a, b):
        return sum(a[i][j] * b[i][j] for i in range(n) for j in range(n))

    return hsic(kc, lc) / math.sqrt(hsic(kc, kc) * hsic(lc, lc))


def test_hand_example():
    x = [[1, 0], [0, 1], [1, 1]]
    y = [[1], [2], [3]]
    expected = 3 / (2 * math.sqrt(10))
    assert brute_cka(x, y) == pytest.approx(expected, abs=1e-12)
    assert linear_cka(np.array(x), np.array(y)) == pytest.approx(expected, abs=1e-12)


def test_self_similarity_and_invariances():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(20, 5))
    y = rng.normal(size=(20, 3))
    q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
    assert linear_cka(x, x) == pytest.approx(1.0, abs=1e-12)
    assert linear_cka(x @ q, y) == pytest.approx(linear_cka(x, y), abs=1e-12)
    assert linear_cka(7.5 * x, y) == pytest.approx(linear_cka(x, y), abs=1e-12)
    assert linear_cka(x + 3.0, y) == pytest.approx(linear_cka(x, y), abs=1e-12)
    assert linear_cka(x, y) == pytest.approx(linear_cka(y, x), abs=1e-12)
    assert 0.0 <= linear_cka(x, y) <= 1.0


def test_errors():
    with pytest.raises(ValueError, match="row mismatch"):
        linear_cka(np.ones((3, 2)) * [[1], [2], [3]], np.arange(8.0).reshape(4, 2))
    with pytest.raises(DegenerateInputError):
        linear_cka(np.ones((4, 2)), np.arange(8.0).reshape(4, 2))
    with pytest.raises(DegenerateInputError):
        linear_cka(np.arange(8.0).reshape(4, 2), np.full((4, 3), 1e9 + 0.1))
    with pytest.raises(ValueError):
        EmbeddingMatrix(np.ones(3))
    with pytest.raises(ValueError):
        EmbeddingMatrix(np.ones((1, 3)))
    with pytest.raises(ValueError):
        EmbeddingMatrix(np.array([[1.0, np.nan], [0.0, 1.0]]))


matrices = st.integers(2, 8).flatmap(
    lambda n: st.tuples(
        st.integers(1, 8).flatmap(lambda d: st.lists(st.lists(st.integers(-5, 5), min_size=d, max_size=d), min_size=n, max_size=n)),
        st.integers(1, 8).flatmap(lambda d: st.lists(st.lists(st.integers(-5, 5), min_size=d, max_size=d), min_size=n, max_size=n)),
    )
)


def nondegenerate(m):
    return any(len({r[j] for r in m}) > 1 for j in range(len(m[0])))


@settings(max_examples=200)
@given(matrices)
def test_matches_brute_force(pair):
    x, y = pair
    if not (nondegenerate(x) and nondegenerate(y)):
        with pytest.raises(DegenerateInputError):
            linear_cka(np.array(x), np.array(y))
        return
    got = linear_cka(np.array(x), np.array(y))
    assert got == pytest.approx(brute_cka(x, y), abs=1e-9)
    assert -1e-12 <= got <= 1 + 1e-12


def test_matrix_file_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    m = rng.normal(size=(6, 4))
    write_matrix(tmp_path / "en.txt", m)
    back = read_matrix(tmp_path / "en.txt")
    assert back.label == "en"
    assert np.array_equal(back.values, m)
    (tmp_path / "de.csv").write_text("2,2\n1,2\n3,4\n")
    assert read_matrix(tmp_path / "de.csv").values.tolist() == [[1, 2], [3, 4]]


@pytest.mark.parametrize(
    "body, needle",
    [
        ("", "empty"),
        ("2\n1 2\n", ":1:"),
        ("2 2\n1 2\n", "found 1"),
        ("2 2\n1 2\n3\n", ":3:"),
        ("2 2\n1 2\n3 x\n", ":3:"),
    ],
)
def test_matrix_file_errors(tmp_path, body, needle):
    p = tmp_path / "en.txt"
    p.write_text(body)
    with pytest.raises(ValueError, match=needle):
        read_matrix(p)


def test_cka_table(tmp_path):
    rng = np.random.default_rng(2)
    x = rng.normal(size=(64, 16))
    y = rng.normal(size=(64, 16))
    write_matrix(tmp_path / "en.txt", x)
    write_matrix(tmp_path / "de.txt", x)
    write_matrix(tmp_path / "zh.txt", y)
    (tmp_path / "notes.md").write_text("ignored")
    assert set(find_matrices(tmp_path)) == {"en", "de", "zh"}
    table = cka_table(tmp_path, "en")
    assert table.cells["de"] == pytest.approx(1.0, abs=1e-12)
    assert 0.0 < table.cells["zh"] < 1.0
    assert table.cells["zh"] == pytest.approx(brute_cka(x.tolist(), y.tolist()), abs=1e-9)
    assert table.avg == pytest.approx((1.0 + table.cells["zh"]) / 2)
    with pytest.raises(FileNotFoundError):
        cka_table(tmp_path, "ko")
