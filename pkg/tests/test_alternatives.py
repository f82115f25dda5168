import math

import numpy as np
import pytest

from spacings_gof import (
    DomainError,
    PositivityError,
    cdf,
    inverse_cdf,
    make_alternative,
    parse_path,
    sample_sorted,
    substream,
)
from spacings_gof.alternatives import sample_values


class TestCosineModel:
    def test_delta_and_norms(self):
        m = make_alternative("cosine", (1, 1.0), 10_000, 10)
        assert m.delta == pytest.approx((1e5) ** -0.25, rel=1e-12)
        assert m.delta == pytest.approx(0.05623413251903491, rel=1e-12)
        assert m.l2norm2 == pytest.approx(0.5, abs=1e-10)
        assert m.l3norm3 == pytest.approx(0.0, abs=1e-10)

    def test_theta_two(self):
        m = make_alternative("cosine", (1, 2.0), 10_000, 10)
        assert m.l2norm2 == pytest.approx(2.0, abs=1e-10)
        assert m.l3norm3 == pytest.approx(0.0, abs=1e-10)

    def test_positivity_violation(self):
        with pytest.raises(PositivityError):
            make_alternative("cosine", (1, 100.0), 4, 1)

    def test_mean_zero(self):
        m = make_alternative("cosine", (3, 1.5), 1000, 5)
        assert abs(float(m.path_integral(1.0))) <= 1e-10


class TestCdf:
    def test_identity_when_flat(self):
        m = make_alternative("cosine", (1, 0.0), 1000, 5)
        x = np.linspace(0, 1, 11)
        np.testing.assert_allclose(cdf(m, x), x, atol=1e-15)
        np.testing.assert_allclose(inverse_cdf(m, x), x, atol=1e-12)

    def test_cosine_closed_form(self):
        m = make_alternative("cosine", (1, 1.0), 1000, 5)
        x = np.linspace(0, 1, 101)
        expected = x + m.delta * np.sin(2 * np.pi * x) / (2 * np.pi)
        np.testing.assert_allclose(cdf(m, x), expected, atol=1e-13)
        assert cdf(m, 0.5) == pytest.approx(0.5, abs=1e-15)
        assert cdf(m, 0.0) == 0.0 and cdf(m, 1.0) == pytest.approx(1.0, abs=1e-14)

    def test_monotone(self):
        m = make_alternative("bump", (0.4, 0.2, 1.5), 2000, 4)
        x = np.linspace(0, 1, 2001)
        assert (np.diff(cdf(m, x)) > 0).all()

    @pytest.mark.parametrize("kind,params", [
        ("cosine", (2, 1.0)),
        ("bump", (0.5, 0.25, 1.0)),
    ])
    def test_roundtrip(self, kind, params):
        m = make_alternative(kind, params, 4000, 8)
        u = np.linspace(0, 1, 1001)
        y = inverse_cdf(m, u)
        np.testing.assert_allclose(cdf(m, y), u, atol=1e-10)

    def test_domain(self):
        m = make_alternative("cosine", (1, 1.0), 1000, 5)
        with pytest.raises(DomainError):
            cdf(m, 1.5)
        with pytest.raises(DomainError):
            inverse_cdf(m, -0.1)


class TestTableModel:
    def test_spline_path(self, tmp_path):
        xs = np.linspace(0, 1, 21)
        ys = np.sin(2 * np.pi * xs) + 0.3
        m = make_alternative("table", (xs, ys), 2000, 4)
        assert abs(float(m.path_integral(1.0))) <= 1e-10
        u = np.linspace(0, 1, 301)
        np.testing.assert_allclose(cdf(m, inverse_cdf(m, u)), u, atol=1e-10)
        # file-based CLI syntax
        p = tmp_path / "path.txt"
        np.savetxt(p, np.column_stack([xs, ys]))
        m2 = parse_path(f"table:{p}", 2000, 4)
        assert m2.l2norm2 == pytest.approx(m.l2norm2, rel=1e-12)

    def test_too_few_points(self):
        with pytest.raises(DomainError):
            make_alternative("table", ([0.0, 0.5, 1.0], [0.0, 1.0, 0.0]), 100, 2)


class TestSampling:
    def test_single_point_reproducible(self):
        a = sample_sorted(None, 2, seed=42)
        b = sample_sorted(None, 2, seed=42)
        assert a.values.size == 1 and 0 < a.values[0] < 1
        assert a.values[0] == b.values[0]

    def test_null_mean(self):
        s = sample_sorted(None, 10_000, seed=7)
        tol = 3.0 / math.sqrt(12 * 10_000)
        assert abs(s.values.mean() - 0.5) < tol

    def test_sorted_in_unit_interval(self):
        for seed in (1, 2, 3):
            s = sample_sorted(None, 500, seed=seed)
            assert (np.diff(s.values) >= 0).all()
            assert s.values[0] > 0 and s.values[-1] < 1

    def test_kolmogorov_distance_shrinks(self):
        # sup |F_hat - x| should scale like 1/sqrt(n)
        ks = []
        for n in (2000, 8000, 32_000):
            s = sample_sorted(None, n, seed=11)
            i = np.arange(1, n)
            ks.append(max(np.abs(i / n - s.values).max(),
                          np.abs(s.values - (i - 1) / n).max()))
        assert ks[0] > ks[1] > ks[2]
        assert ks[2] < 3.0 / math.sqrt(32_000)

    def test_cosine_tilt_recovers_delta(self):
        # E cos(2 pi X) = delta * theta / 2 under the cosine(1) model
        n, m, theta = 40_000, 5, 1.0
        model = make_alternative("cosine", (1, theta), n, m)
        acc = []
        for seed in (3, 4, 5):
            s = sample_values(model, n, substream(seed, 0))
            acc.append(np.cos(2 * np.pi * s).mean())
        got = np.mean(acc)
        se = math.sqrt(0.5 / (3 * n))
        assert abs(got - model.delta * theta / 2) < 4 * se

    def test_off_theory_delta_flag(self):
        m = make_alternative("cosine", (1, 1.0), 1000, 5, delta_override=0.2)
        assert m.off_theory_delta and m.delta == 0.2

    def test_parse_path(self):
        assert parse_path("null", 100, 2) is None
        m = parse_path("cos:2:1.5", 1000, 4)
        assert m.kind == "cosine" and m.params == (2, 1.5)
        with pytest.raises(DomainError):
            parse_path("wedge:1", 100, 2)
