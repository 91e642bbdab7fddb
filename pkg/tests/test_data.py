import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from treedict.data import (
    DataSet,
    Preprocessor,
    dct_mterm_approx,
    frobenius_norm,
    inverse_dct,
    load_csv,
    rank_r_approx,
    save_csv,
    spectral_norm,
)
from treedict.toy import TOY_PATCHES

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
patches = arrays(float, st.tuples(st.integers(1, 5), st.integers(1, 5)), elements=finite)


def test_frobenius_norm_examples():
    assert frobenius_norm(np.zeros((3, 3))) == 0
    assert frobenius_norm([3.0, 4.0]) == 5
    assert frobenius_norm(TOY_PATCHES[6]) == pytest.approx(np.sqrt(5), abs=1e-12)


@pytest.mark.parametrize("patch, expected", [
    (np.eye(2), 1.0),
    (np.diag([3.0, 1.0]), 3.0),
    ([[0.0, 2.0], [0.0, 0.0]], 2.0),
    # dominant right singular vector orthogonal to the all-ones vector
    ([[1.0, -1.0], [1.0, -1.0]], 2.0),
])
def test_spectral_norm_examples(patch, expected):
    assert spectral_norm(patch) == pytest.approx(expected, rel=1e-10)


def test_spectral_norm_flat_is_euclidean():
    assert spectral_norm([3.0, 4.0]) == 5.0


def test_rank_r_examples(rng):
    a = np.outer([1.0, 2.0, 3.0], [1.0, -1.0])
    np.testing.assert_allclose(rank_r_approx(a, 1), a, atol=1e-12)
    np.testing.assert_allclose(rank_r_approx(np.diag([5.0, 2.0]), 1), np.diag([5.0, 0.0]), atol=1e-12)
    x = rng.standard_normal((4, 4))
    sv = np.linalg.svd(x, compute_uv=False)
    err = frobenius_norm(x - rank_r_approx(x, 2))
    assert err == pytest.approx(np.sqrt(sv[2] ** 2 + sv[3] ** 2), rel=1e-10)


def test_rank_r_rejects_bad_rank():
    with pytest.raises(ValueError):
        rank_r_approx(np.eye(3), 0)
    with pytest.raises(ValueError):
        rank_r_approx(np.eye(3), 4)
    with pytest.raises(ValueError):
        rank_r_approx(np.ones(3), 1)


def test_dct_examples(rng):
    const = np.full((3, 4), 2.5)
    np.testing.assert_allclose(dct_mterm_approx(const, 1), const, atol=1e-12)
    x = rng.standard_normal((4, 4))
    np.testing.assert_allclose(dct_mterm_approx(x, 16), x, atol=1e-12)
    b1 = np.zeros((4, 4)); b1[1, 2] = 1
    b2 = np.zeros((4, 4)); b2[3, 0] = 1
    big, small = inverse_dct(b1), inverse_dct(b2)
    np.testing.assert_allclose(dct_mterm_approx(3 * big + small, 1), 3 * big, atol=1e-12)


def test_dct_flat_and_range():
    x = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(dct_mterm_approx(x, 3), x, atol=1e-12)
    with pytest.raises(ValueError):
        dct_mterm_approx(x, 0)
    with pytest.raises(ValueError):
        dct_mterm_approx(x, 4)


def test_dct_ties_resolved_by_index():
    c = np.zeros((2, 2)); c[0, 1] = 1; c[1, 0] = -1
    out = dct_mterm_approx(inverse_dct(c), 1)
    np.testing.assert_allclose(out, inverse_dct(np.array([[0, 1], [0, 0]])), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(patches)
def test_rank_error_monotone(x):
    errs = [frobenius_norm(x - rank_r_approx(x, r)) for r in range(1, min(x.shape) + 1)]
    assert all(a >= b - 1e-9 for a, b in zip(errs, errs[1:]))


@settings(max_examples=60, deadline=None)
@given(patches)
def test_dct_error_monotone_and_full_round_trip(x):
    errs = [frobenius_norm(x - dct_mterm_approx(x, M)) for M in range(1, x.size + 1)]
    assert all(a >= b - 1e-9 for a, b in zip(errs, errs[1:]))
    np.testing.assert_allclose(dct_mterm_approx(x, x.size), x, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(patches)
def test_spectral_below_frobenius(x):
    assert spectral_norm(x) <= frobenius_norm(x) + 1e-9


def test_dataset_invariants():
    with pytest.raises(ValueError):
        DataSet(np.array([[1.0, np.nan]]))
    with pytest.raises(ValueError):
        DataSet.from_samples([np.zeros((2, 2)), np.zeros((3, 3))])
    with pytest.raises(ValueError):
        DataSet(np.zeros((2, 4)), (3, 3))
    d = DataSet.from_samples(TOY_PATCHES)
    assert d.N == 8 and d.n == 9 and d.shape == (3, 3)
    np.testing.assert_array_equal(d.sample(3), TOY_PATCHES[3])
    with pytest.raises(ValueError):
        d.values[0, 0] = 1.0


def test_preprocessors(toy):
    assert Preprocessor().apply(toy) is toy
    r1 = Preprocessor("rank_r", 1).apply(toy)
    assert all(np.linalg.matrix_rank(r1.sample(j)) <= 1 for j in range(r1.N))
    m = Preprocessor("dct_mterm", 2).apply(toy)
    assert m.shape == toy.shape
    f = Preprocessor("spectral_norm_feature").apply(toy)
    assert f.shape == (1,) and f.N == 8
    with pytest.raises(ValueError):
        Preprocessor("rank_r", 4).apply(toy)
    with pytest.raises(ValueError):
        Preprocessor("dct_mterm", 10).apply(toy)
    with pytest.raises(ValueError):
        Preprocessor("rank_r", 1).apply(DataSet(np.ones((3, 4))))


def test_csv_round_trip(tmp_path, toy, rng):
    p = tmp_path / "toy.csv"
    save_csv(toy, p)
    assert p.read_text().splitlines()[0] == "# shape 3 3 9"
    back = load_csv(p)
    assert back.shape == (3, 3)
    np.testing.assert_array_equal(back.values, toy.values)
    flat = DataSet(rng.standard_normal((5, 4)))
    save_csv(flat, p)
    back = load_csv(p)
    assert back.shape == (4,)
    np.testing.assert_array_equal(back.values, flat.values)


def test_csv_bad_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1,2,3\n")
    with pytest.raises(ValueError):
        load_csv(p)
    p.write_text("# shape 2 2 3\n1,2,3\n")
    with pytest.raises(ValueError):
        load_csv(p)
