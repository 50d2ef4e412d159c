import numpy as np
import pytest
from scipy import stats

from gaussmicro.haar import (
    RngStream,
    embed_compact,
    haar_average_cm_check,
    haar_columns,
    is_compact_symplectic,
    sample_compact_symplectic,
    sample_unitary,
)
from gaussmicro.symplectic import symplectic_form


def test_u1_phase_is_uniform():
    x, y = sample_unitary(1, np.random.default_rng(0), size=20000)
    phi = np.mod(np.arctan2(y[:, 0, 0], x[:, 0, 0]), 2 * np.pi)
    np.testing.assert_allclose(np.hypot(x, y), 1.0, atol=1e-12)
    assert stats.kstest(phi / (2 * np.pi), "uniform").pvalue > 0.01


@pytest.mark.parametrize("n", [1, 2, 4, 9])
def test_unitarity(n):
    x, y = sample_unitary(n, np.random.default_rng(n), size=200)
    lhs = x @ np.swapaxes(x, -1, -2) + y @ np.swapaxes(y, -1, -2)
    np.testing.assert_allclose(lhs, np.broadcast_to(np.eye(n), lhs.shape), atol=1e-10)


def test_first_column_moments():
    # a Haar column is uniform on the complex unit sphere: E|u_i|^2 = 1/n
    n, draws = 4, 100_000
    u = haar_columns(n, 1, np.random.default_rng(11), size=draws)[:, :, 0]
    p = np.abs(u) ** 2
    mean = p.mean(axis=0)
    se = p.std(axis=0, ddof=1) / np.sqrt(draws)
    assert np.all(np.abs(mean - 1 / n) < 3 * se)


def test_embed_examples():
    np.testing.assert_array_equal(embed_compact(np.eye(3), np.zeros((3, 3))), np.eye(6))
    np.testing.assert_array_equal(embed_compact([[0.0]], [[1.0]]), symplectic_form(1))
    with pytest.raises(ValueError):
        embed_compact(2 * np.eye(2), np.zeros((2, 2)))


def test_embedding_is_homomorphism():
    rng = np.random.default_rng(3)
    x1, y1 = sample_unitary(3, rng)
    x2, y2 = sample_unitary(3, rng)
    u = (x1 + 1j * y1) @ (x2 + 1j * y2)
    np.testing.assert_allclose(embed_compact(x1, y1) @ embed_compact(x2, y2),
                               embed_compact(u.real, u.imag), atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 5, 20])
def test_compact_symplectic_invariants(n):
    o = sample_compact_symplectic(n, np.random.default_rng(100 + n), size=500)
    assert is_compact_symplectic(o, tol=1e-10)
    np.testing.assert_allclose(np.linalg.det(o), 1.0, atol=1e-8)
    # block structure: top-right = -(bottom-left)
    np.testing.assert_array_equal(o[:, :n, n:], -o[:, n:, :n])


def test_n1_entry_mean_zero():
    o = sample_compact_symplectic(1, np.random.default_rng(8), size=100_000)
    v = o[:, 0, 0]
    assert abs(v.mean()) < 3 * v.std(ddof=1) / np.sqrt(v.size)


def test_left_invariance_ks():
    rng = np.random.default_rng(21)
    k = sample_compact_symplectic(3, rng)
    a = sample_compact_symplectic(3, rng, size=10_000)
    b = sample_compact_symplectic(3, rng, size=10_000)
    ko = (k @ b)[:, 0, 0]
    assert stats.ks_2samp(a[:, 0, 0], ko).pvalue > 0.01
    ok = (b @ k)[:, 0, 0]
    assert stats.ks_2samp(a[:, 0, 0], ok).pvalue > 0.01


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("row", [0, -1])
def test_haar_row_products(n, row):
    draws = 100_000
    o = sample_compact_symplectic(n, np.random.default_rng(40 + n), size=draws)
    r = o[:, row, :]
    prod = r[:, :, None] * r[:, None, :]
    m = prod.mean(axis=0)
    se = prod.std(axis=0, ddof=1) / np.sqrt(draws)
    target = np.eye(2 * n) / (2 * n)
    assert np.all(np.abs(m - target) <= 4 * se)


def test_haar_average_cm_n1_exact():
    rep = haar_average_cm_check([7.0], 20_000, np.random.default_rng(1))
    # sigma_11 + sigma_22 = E for every draw, and phase symmetry splits it evenly
    assert rep["mean"][0, 0] + rep["mean"][1, 1] == pytest.approx(7.0, abs=1e-10)
    assert abs(rep["mean"][0, 0] - 3.5) < 4 * rep["stderr"][0, 0]


def test_haar_average_cm_n3():
    rep = haar_average_cm_check([4.0, 6.0, 8.0], 100_000, np.random.default_rng(2))
    np.testing.assert_allclose(rep["target"], 3.0 * np.eye(6))
    assert rep["max_z"] <= 4.0


def test_second_moments_offdiagonal_suppressed():
    # at leading order in 1/n off-diagonal second moments are small compared
    # with the diagonal ones; check the ratio shrinks as n grows
    ratios = []
    for n in (2, 8):
        e = np.full(n, 6.0)
        rep = haar_average_cm_check(e, 20_000, np.random.default_rng(n))
        sm = rep["second_moment"]
        off = sm[~np.eye(2 * n, dtype=bool)].mean()
        ratios.append(off / np.diag(sm).mean())
    assert ratios[1] < ratios[0]


def test_rng_stream_determinism():
    a = sample_compact_symplectic(4, RngStream(7, 3))
    b = sample_compact_symplectic(4, RngStream(7, 3))
    c = sample_compact_symplectic(4, RngStream(7, 4))
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    np.testing.assert_array_equal(RngStream(1).generator(5).random(3),
                                  RngStream(1).generator(5).random(3))
    assert RngStream(1).child(2) == RngStream(1).child(2)
