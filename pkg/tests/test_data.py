import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcels.data import (Dataset, apply_normalization, fit_normalization,
                        invert_normalization, parse_native, parse_uea_ts,
                        serialize_native)
from mcels.errors import DataError


def make_dataset(X, y, C):
    return Dataset(np.asarray(X, dtype=float), np.asarray(y), C)


# ---------------------------------------------------------------------------
# native format
# ---------------------------------------------------------------------------

class TestParseNative:
    def test_minimal_file(self):
        ds = parse_native("#MTS v1 T=2 D=1 C=2\n0 1.0 2.0\n")
        assert ds.n == 1
        assert ds.series_length == 2 and ds.n_dims == 1 and ds.n_classes == 2
        assert np.array_equal(ds.X[0], [[1.0], [2.0]])
        assert ds.y[0] == 0

    def test_t_major_layout(self):
        # values are t-major then d: v(0,0) v(0,1) v(1,0) v(1,1)
        ds = parse_native("#MTS v1 T=2 D=2 C=2\n1 1 2 3 4\n")
        assert np.array_equal(ds.X[0], [[1, 2], [3, 4]])

    def test_wrong_value_count_reports_line(self):
        with pytest.raises(DataError, match="line 2"):
            parse_native("#MTS v1 T=2 D=1 C=2\n0 1.0 2.0 3.0\n")

    def test_bad_header(self):
        with pytest.raises(DataError, match="header"):
            parse_native("#MTS v2 T=2 D=1 C=2\n0 1 2\n")

    def test_label_out_of_range(self):
        with pytest.raises(DataError, match="label"):
            parse_native("#MTS v1 T=2 D=1 C=2\n2 1.0 2.0\n")

    def test_non_finite_value(self):
        with pytest.raises(DataError, match="non-finite"):
            parse_native("#MTS v1 T=2 D=1 C=2\n0 1.0 inf\n")

    def test_scientific_notation(self):
        ds = parse_native("#MTS v1 T=2 D=1 C=2\n0 1e-3 -2.5E+2\n")
        assert np.array_equal(ds.X[0], [[1e-3], [-250.0]])


@st.composite
def datasets(draw):
    T = draw(st.integers(2, 6))
    D = draw(st.integers(1, 3))
    C = draw(st.integers(2, 4))
    n = draw(st.integers(1, 5))
    values = draw(st.lists(
        st.floats(-1e12, 1e12, allow_nan=False, allow_infinity=False),
        min_size=n * T * D, max_size=n * T * D))
    labels = draw(st.lists(st.integers(0, C - 1), min_size=n, max_size=n))
    X = np.asarray(values).reshape(n, T, D)
    return Dataset(X, np.asarray(labels), C)


@given(datasets())
@settings(max_examples=60)
def test_native_round_trip(ds):
    again = parse_native(serialize_native(ds))
    assert again.equals(ds)


@given(st.text(max_size=300))
@settings(max_examples=200)
def test_parser_never_crashes_on_arbitrary_text(text):
    try:
        parse_native(text)
    except DataError:
        pass
    try:
        parse_uea_ts(text)
    except DataError:
        pass


# ---------------------------------------------------------------------------
# UEA .ts subset
# ---------------------------------------------------------------------------

TS_HEADER = (
    "@problemName toy\n"
    "@dimensions 2\n"
    "@seriesLength 2\n"
    "@equalLength true\n"
    "@classLabel true a b\n"
    "@data\n"
)


class TestParseUeaTs:
    def test_basic_line(self):
        ds = parse_uea_ts(TS_HEADER + "1,2:3,4:a\n")
        assert np.array_equal(ds.X[0], [[1, 3], [2, 4]])
        assert ds.y[0] == 0
        assert ds.class_names == ["a", "b"]
        assert ds.name == "toy"

    def test_label_order_is_declaration_order(self):
        ds = parse_uea_ts(TS_HEADER + "1,2:3,4:b\n1,2:3,4:a\n")
        assert list(ds.y) == [1, 0]

    def test_missing_value_marker(self):
        with pytest.raises(DataError, match=r"\?"):
            parse_uea_ts(TS_HEADER + "1,?:3,4:a\n")

    def test_dimension_count_mismatch(self):
        with pytest.raises(DataError, match="dimensions"):
            parse_uea_ts(TS_HEADER + "1,2:a\n")

    def test_series_length_mismatch(self):
        with pytest.raises(DataError, match="values"):
            parse_uea_ts(TS_HEADER + "1,2,3:4,5,6:a\n")

    def test_unknown_class_label(self):
        with pytest.raises(DataError, match="unknown class label"):
            parse_uea_ts(TS_HEADER + "1,2:3,4:c\n")

    def test_equal_length_false_rejected(self):
        text = TS_HEADER.replace("@equalLength true", "@equalLength false")
        with pytest.raises(DataError, match="equal-length"):
            parse_uea_ts(text + "1,2:3,4:a\n")

    def test_unknown_directives_ignored(self):
        text = "@timestamps false\n@univariate false\n" + TS_HEADER
        ds = parse_uea_ts(text + "1,2:3,4:a\n")
        assert ds.n == 1

    def test_comment_lines_ignored(self):
        ds = parse_uea_ts("# description\n" + TS_HEADER + "1,2:3,4:a\n")
        assert ds.n == 1


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------

class TestNormalization:
    def test_two_point_population_std(self):
        ds = make_dataset([[[0.0], [2.0]]], [0], 2)
        mean, std = fit_normalization(ds)
        assert mean == pytest.approx([1.0]) and std == pytest.approx([1.0])

    def test_degenerate_dimension_gets_unit_std(self):
        ds = make_dataset([[[5.0, 1.0], [5.0, 3.0]]], [0], 2)
        mean, std = fit_normalization(ds)
        assert std[0] == 1.0
        assert std[1] == pytest.approx(1.0)

    def test_matches_two_pass_oracle(self):
        rng = np.random.default_rng(3)
        X = rng.normal(2.0, 5.0, size=(7, 6, 4))
        ds = make_dataset(X, rng.integers(0, 2, 7), 2)
        mean, std = fit_normalization(ds)
        for d in range(4):
            column = X[:, :, d].reshape(-1)
            exp_mean = sum(column) / column.size
            exp_var = sum((v - exp_mean) ** 2 for v in column) / column.size
            assert mean[d] == pytest.approx(exp_mean, abs=1e-12)
            assert std[d] == pytest.approx(exp_var ** 0.5, abs=1e-12)

    def test_identity_stats(self):
        x = np.array([[1.0, 2.0], [3.0, 4.0]])
        out = apply_normalization(x, np.zeros(2), np.ones(2))
        assert np.array_equal(out, x)

    def test_scalar_case(self):
        out = apply_normalization(np.array([[3.0], [5.0]]), np.array([1.0]), np.array([2.0]))
        assert np.array_equal(out, [[1.0], [2.0]])

    def test_apply_invert_round_trip(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(9, 3))
        mean = rng.normal(size=3)
        std = rng.uniform(0.5, 2.0, size=3)
        back = invert_normalization(apply_normalization(x, mean, std), mean, std)
        assert np.allclose(back, x, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DataError, match="mismatch"):
            apply_normalization(np.zeros((4, 3)), np.zeros(2), np.ones(2))

    def test_train_split_is_standardized_after_fit_apply(self):
        rng = np.random.default_rng(5)
        X = rng.normal(-3.0, 7.0, size=(11, 8, 3))
        ds = make_dataset(X, rng.integers(0, 2, 11), 2)
        mean, std = fit_normalization(ds)
        normalized = apply_normalization(ds.X, mean, std).reshape(-1, 3)
        assert np.all(np.abs(normalized.mean(axis=0)) < 1e-9)
        assert np.all(np.abs(normalized.std(axis=0) - 1.0) < 1e-9)
