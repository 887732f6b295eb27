import math
from pathlib import Path

import numpy as np
import pytest

from uwer import mathcore as mc

GOLDEN = Path(__file__).parent / "golden"


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------


def j0_series_oracle(x, terms=60):
    """60-term power series for J0 summed with extended precision (mpmath)."""
    import mpmath as mp

    with mp.workdps(50):
        x = mp.mpf(x)
        q = x * x / 4
        term = mp.mpf(1)
        total = mp.mpf(1)
        for m in range(1, terms):
            term *= -q / (m * m)
            total += term
        return float(total)


def pearson_textbook(x, y):
    import mpmath as mp

    with mp.workdps(50):
        x = [mp.mpf(v) for v in x]
        y = [mp.mpf(v) for v in y]
        n = len(x)
        mx = mp.fsum(x) / n
        my = mp.fsum(y) / n
        sxy = mp.fsum((a - mx) * (b - my) for a, b in zip(x, y))
        sxx = mp.fsum((a - mx) ** 2 for a in x)
        syy = mp.fsum((b - my) ** 2 for b in y)
        return float(sxy / mp.sqrt(sxx * syy))


# ---------------------------------------------------------------------------
# Rng
# ---------------------------------------------------------------------------


def test_rng_fixed_seed_reproduces():
    a = mc.Rng(987654321).next_u64(512)
    b = mc.Rng(987654321).next_u64(512)
    assert np.array_equal(a, b)


def test_rng_golden_transcript():
    got = [int(v) for v in mc.Rng(42).next_u64(1000)]
    want = [int(line) for line in (GOLDEN / "rng_seed42_u64.txt").read_text().split()]
    assert got == want


def test_rng_chunking_invariance():
    r1 = mc.Rng(5)
    parts = np.concatenate([r1.next_u64(7), r1.next_u64(13), r1.next_u64(80)])
    assert np.array_equal(parts, mc.Rng(5).next_u64(100))


def test_rng_split_streams_differ_and_are_stable():
    r = mc.Rng(1234)
    a = r.split("dropout")
    b = r.split("buffer")
    assert a.seed != b.seed
    assert a.seed == mc.Rng(1234).split("dropout").seed
    # splitting does not consume parent draws
    assert np.array_equal(r.next_u64(4), mc.Rng(1234).next_u64(4))


def test_gaussian_moments_1e6():
    z = mc.Rng(2024).gaussians(10**6)
    assert abs(z.mean()) < 0.01
    assert abs(z.var() - 1.0) < 0.01


def test_gaussian_complex_zero_variance_exact():
    assert mc.gaussian_complex(mc.Rng(42), 0.0) == 0 + 0j


def test_gaussian_complex_monte_carlo_power():
    z = mc.Rng(7).cgaussians(10**6, 1.0)
    assert 0.99 <= np.mean(np.abs(z) ** 2) <= 1.01


def test_gaussian_complex_deterministic_first_draw():
    assert mc.gaussian_complex(mc.Rng(42), 1.0) == mc.gaussian_complex(mc.Rng(42), 1.0)


def test_cgaussians_match_scalar_loop():
    bulk = mc.Rng(11).cgaussians(9, 3.0)
    r = mc.Rng(11)
    loop = np.array([mc.gaussian_complex(r, 3.0) for _ in range(9)])
    assert np.array_equal(bulk, loop)


def test_gaussians_odd_draw_count_is_fixed():
    r = mc.Rng(3)
    r.gaussians(5)
    assert r.counter == 6  # 2 * ceil(5/2)


def test_gaussian_complex_negative_variance_rejected():
    with pytest.raises(ValueError):
        mc.gaussian_complex(mc.Rng(0), -1.0)


def test_integers_in_range():
    v = mc.Rng(9).integers(10000, 7)
    assert v.min() >= 0 and v.max() <= 6
    assert set(np.unique(v)) == set(range(7))


# ---------------------------------------------------------------------------
# bessel_j0
# ---------------------------------------------------------------------------


def test_j0_at_zero():
    assert mc.bessel_j0(0.0) == 1.0


def test_j0_first_zero():
    # 2.404825557695773 located by bisection on the high-precision series
    assert abs(mc.bessel_j0(2.404826)) < 1e-5
    assert abs(mc.bessel_j0(2.404825557695773)) < 1e-12


def test_j0_at_pi():
    # oracle: j0_series_oracle(pi) = -0.30424217764409384
    assert mc.bessel_j0(math.pi) == pytest.approx(-0.30424217764409384, abs=1e-12)


def test_j0_series_agreement_200_points():
    rng = mc.Rng(77)
    xs = rng.uniforms(200) * 8.0
    for x in xs:
        assert abs(mc.bessel_j0(float(x)) - j0_series_oracle(float(x))) < 1e-9


def test_j0_asymptotic_region_against_mpmath():
    import mpmath as mp

    for x in np.linspace(8.0, 50.0, 211):
        ref = float(mp.besselj(0, mp.mpf(float(x))))
        assert abs(mc.bessel_j0(float(x)) - ref) < 1e-9


def test_j0_even_function():
    for x in (0.5, 3.3, 17.0):
        assert mc.bessel_j0(-x) == mc.bessel_j0(x)


def test_j0_rejects_nonfinite():
    with pytest.raises(ValueError):
        mc.bessel_j0(float("nan"))
    with pytest.raises(ValueError):
        mc.bessel_j0(float("inf"))


# ---------------------------------------------------------------------------
# mat_sqrt_psd
# ---------------------------------------------------------------------------


def test_sqrt_identity():
    s = mc.mat_sqrt_psd(np.eye(4, dtype=complex))
    assert np.max(np.abs(s - np.eye(4))) < 1e-12


def test_sqrt_diagonal():
    s = mc.mat_sqrt_psd(np.diag([4.0, 9.0]).astype(complex))
    assert np.max(np.abs(s - np.diag([2.0, 3.0]))) < 1e-10


def test_sqrt_toeplitz_j0_pi():
    r = mc.bessel_j0(math.pi)
    a = np.array([[1.0, r], [r, 1.0]], dtype=complex)
    s = mc.mat_sqrt_psd(a)
    assert np.max(np.abs(s @ s.conj().T - a)) < 1e-8
    assert mc.is_hermitian(s)


def test_sqrt_multiply_back_50_random_psd():
    rng = mc.Rng(31)
    for _ in range(50):
        n = int(rng.integers(1, 8)[0]) + 1
        b = rng.cgaussians(n * n).reshape(n, n)
        a = b @ b.conj().T
        s = mc.mat_sqrt_psd(a)
        assert np.max(np.abs(s @ s.conj().T - a)) < 1e-8


def test_sqrt_rejects_indefinite():
    a = np.diag([1.0, -0.5]).astype(complex)
    with pytest.raises(ValueError):
        mc.mat_sqrt_psd(a, tol=1e-10)


def test_sqrt_clamps_tiny_negative():
    a = np.diag([1.0, -1e-12]).astype(complex)
    s = mc.mat_sqrt_psd(a, tol=1e-10)
    assert np.max(np.abs(s @ s.conj().T - np.diag([1.0, 0.0]))) < 1e-8


def test_sqrt_rejects_non_hermitian():
    a = np.array([[1.0, 2.0], [0.0, 1.0]], dtype=complex)
    with pytest.raises(ValueError):
        mc.mat_sqrt_psd(a)


# ---------------------------------------------------------------------------
# pearson_r
# ---------------------------------------------------------------------------


def test_pearson_self():
    assert mc.pearson_r([1, 2, 3], [1, 2, 3]) == 1.0


def test_pearson_sign_flip():
    assert mc.pearson_r([1, 2, 3], [-1, -2, -3]) == -1.0


def test_pearson_matches_textbook_formula():
    x = [1.0, 2.0, 3.0, 4.0]
    y = [1.0, 2.0, 3.0, 100.0]
    # oracle: pearson_textbook(x, y) = 0.78502642096301
    assert mc.pearson_r(x, y) == pytest.approx(pearson_textbook(x, y), abs=1e-12)
    assert mc.pearson_r(x, y) == pytest.approx(0.78502642096301, abs=1e-12)


def test_pearson_affine_invariance():
    rng = mc.Rng(555)
    for _ in range(20):
        x = rng.gaussians(40)
        y = rng.gaussians(40)
        a = rng.uniform() * 5 + 0.1
        b = rng.uniform() * 10 - 5
        assert mc.pearson_r(a * x + b, y) == pytest.approx(mc.pearson_r(x, y), abs=1e-12)


def test_pearson_errors():
    with pytest.raises(ValueError):
        mc.pearson_r([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        mc.pearson_r([1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        mc.pearson_r([1], [2])


# ---------------------------------------------------------------------------
# sigmoid
# ---------------------------------------------------------------------------


def test_sigmoid_center():
    assert mc.sigmoid(0.0) == 0.5


def test_sigmoid_saturation_no_overflow():
    assert mc.sigmoid(1000.0) == 1.0
    assert mc.sigmoid(-1000.0) == 0.0


def test_sigmoid_unit_value():
    # oracle: 1/(1+exp(-1)) with 50-digit mpmath = 0.7310585786300049
    assert mc.sigmoid(1.0) == pytest.approx(0.7310585786300049, abs=1e-15)


def test_sigmoid_array_matches_scalar():
    xs = np.array([-800.0, -3.0, 0.0, 2.5, 800.0])
    out = mc.sigmoid(xs)
    for x, o in zip(xs, out):
        assert o == mc.sigmoid(float(x))
