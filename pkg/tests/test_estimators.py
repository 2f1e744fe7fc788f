import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import entropy_bruteforce, mi_bruteforce, pearson_literal

from infs_micc.data_model import from_arrays, preprocess
from infs_micc.estimators import (
    CorrelationMatrix,
    JointHistogram,
    avg_abs_corr,
    discretize,
    entropy,
    mutual_information,
    pearson,
)
from infs_micc.exceptions import ValidationError


class TestDiscretize:
    def test_half_open_bins(self):
        assert discretize([0.0, 0.49, 0.5, 1.0], 2).tolist() == [0, 0, 1, 1]

    def test_endpoint_clamp(self):
        assert discretize([0.0, 1.0], 10).tolist() == [0, 9]

    def test_floor_formula(self):
        assert discretize([0.05, 0.15, 0.95], 10).tolist() == [0, 1, 9]

    def test_too_few_bins(self):
        with pytest.raises(ValidationError):
            discretize([0.5], 1)


class TestMutualInformation:
    def test_self_information_balanced(self):
        assert mutual_information([0, 1, 0, 1], [0, 1, 0, 1]) == pytest.approx(1.0, abs=1e-15)

    def test_independent(self):
        assert mutual_information([0, 0, 1, 1], [0, 1, 0, 1]) == 0.0

    def test_2x2_against_bruteforce(self):
        x, y = [0, 0, 0, 1, 1, 1], [0, 0, 1, 0, 1, 1]
        expected = mi_bruteforce(x, y)
        assert expected == pytest.approx(0.08170416594551044, abs=1e-15)
        assert mutual_information(x, y) == pytest.approx(expected, abs=1e-12)

    def test_errors(self):
        with pytest.raises(ValidationError):
            mutual_information([0, 1], [0])
        with pytest.raises(ValidationError):
            mutual_information([], [])

    def test_histogram_invariants(self):
        h = JointHistogram.from_sequences([0, 2, 1, 2], [1, 0, 0, 1])
        assert h.counts.sum() == h.total == 4
        assert (h.counts >= 0).all()
        assert h.counts.sum(axis=1).sum() == h.counts.sum(axis=0).sum() == 4
        assert (h.row_bins, h.col_bins) == (3, 2)

    @pytest.mark.parametrize("seed", range(50))
    def test_small_tables_match_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 9))
        x = rng.integers(0, 3, n).tolist()
        y = rng.integers(0, 3, n).tolist()
        assert mutual_information(x, y) == pytest.approx(mi_bruteforce(x, y), abs=1e-9)

    def test_log_base(self):
        x, y = [0, 0, 1, 1, 2], [0, 1, 1, 1, 0]
        assert mutual_information(x, y, base=np.e) == pytest.approx(
            mutual_information(x, y) * np.log(2), abs=1e-12
        )


codes = st.lists(st.integers(0, 4), min_size=1, max_size=40)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_mi_symmetry_nonnegativity_entropy(data):
    x = data.draw(codes)
    y = data.draw(st.lists(st.integers(0, 4), min_size=len(x), max_size=len(x)))
    a, b = mutual_information(x, y), mutual_information(y, x)
    assert a >= 0.0
    assert a == pytest.approx(b, abs=1e-12)
    assert mutual_information(x, x) == pytest.approx(entropy(x), abs=1e-12)
    assert entropy(x) == pytest.approx(entropy_bruteforce(x), abs=1e-12)


class TestPearson:
    def test_positive(self):
        assert pearson([1, 2, 3], [3, 5, 7]) == pytest.approx(1.0, abs=1e-15)

    def test_negative(self):
        assert pearson([1, 2, 3], [-1, -2, -3]) == pytest.approx(-1.0, abs=1e-15)

    def test_literal_example(self):
        assert pearson_literal([1, 2, 3], [1, 3, 2]) == 0.5
        assert pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5, abs=1e-15)

    def test_constant_returns_zero(self):
        assert pearson([1, 1, 1], [1, 2, 3]) == 0.0

    def test_errors(self):
        with pytest.raises(ValidationError):
            pearson([1], [1])
        with pytest.raises(ValidationError):
            pearson([1, 2], [1, 2, 3])


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-100, 100, allow_nan=False), min_size=3, max_size=30),
    st.floats(0.01, 50) | st.floats(-50, -0.01),
    st.floats(-100, 100),
    st.integers(0, 10_000),
)
def test_pearson_affine_invariance(x, a, b, seed):
    x = np.asarray(x)
    if np.ptp(x) < 1e-3:
        return
    y = np.random.default_rng(seed).normal(size=x.size)
    assert pearson(a * x + b, y) == pytest.approx(np.sign(a) * pearson(x, y), abs=1e-9)


class TestCorrelationMatrix:
    def test_invariants_on_dataset(self, planted):
        data, _ = planted
        m = CorrelationMatrix.from_dataset(data)
        v = m.values
        assert np.array_equal(v, v.T)
        assert (np.diag(v) == 1.0).all()
        assert v.min() >= 0.0 and v.max() <= 1.0

    def test_entries_match_literal_pearson(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(15, 4))
        m = CorrelationMatrix.from_matrix(X)
        for i in range(4):
            for j in range(4):
                if i != j:
                    assert m.values[i, j] == pytest.approx(abs(pearson_literal(X[:, i], X[:, j])), abs=1e-12)

    def test_deterministic(self, planted):
        data, _ = planted
        a = CorrelationMatrix.from_dataset(data).values
        b = CorrelationMatrix.from_dataset(data).values
        assert a.tobytes() == b.tobytes()

    def test_random_datasets_hold_invariants(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            d = preprocess(from_arrays(rng.normal(size=(30, 6)), rng.integers(0, 2, 30)))
            v = CorrelationMatrix.from_dataset(d).values
            assert np.abs(v - v.T).max() <= 1e-12 and (np.diag(v) == 1.0).all()


def _matrix(rows):
    return CorrelationMatrix(np.asarray(rows, dtype=float), tuple(f"f{i}" for i in range(len(rows))))


class TestAvgCorr:
    def test_divisor_d(self):
        m = _matrix([[1, 1, 0], [1, 1, 0.5], [0, 0.5, 1]])
        assert avg_abs_corr(m, 0) == pytest.approx(1 / 3, abs=1e-15)

    def test_independent(self):
        assert avg_abs_corr(_matrix(np.eye(4)), 2) == 0.0

    def test_two_features(self):
        m = _matrix([[1, 0.8], [0.8, 1]])
        assert avg_abs_corr(m, 0) == pytest.approx(0.4, abs=1e-15)
        assert avg_abs_corr(m, 0, divisor="d-1") == pytest.approx(0.8, abs=1e-15)

    def test_bad_divisor(self):
        with pytest.raises(ValidationError):
            avg_abs_corr(_matrix(np.eye(2)), 0, divisor="n")
