
import numpy as np
import pytest
from hypothesis import given, strategies as st

from rollcast import core
from rollcast.core import TimeSeries
from rollcast.errors import (
    DomainError,
    EmptyDataError,
    ParseError,
    SchemaError,
    ScalerError,
    SplitError,
)

from conftest import write_csv

YAHOO = "Date,Open,High,Low,Close,Adj Close,Volume"

# (name, train, test, total) straight from the observation-count table
TABLE1 = [
    ("N225", 283, 120, 403), ("IXIC", 391, 167, 558), ("HSI", 258, 110, 368),
    ("GSPC", 568, 243, 811), ("DJI monthly", 274, 117, 391),
    ("DJI weekly", 1189, 509, 1698), ("MC", 593, 254, 847), ("HO", 425, 181, 606),
    ("ER", 375, 160, 535), ("FB", 425, 181, 606), ("MS", 492, 210, 702),
    ("TR", 593, 254, 847),
]

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


class TestTimeSeries:
    def test_rejects_nan(self):
        with pytest.raises(DomainError):
            TimeSeries([1.0, float("nan")])

    def test_label_length_must_match(self):
        with pytest.raises(DomainError):
            TimeSeries([1.0, 2.0], ("2000-01-01",))

    def test_labels_strictly_increasing(self):
        with pytest.raises(DomainError):
            TimeSeries([1.0, 2.0], ("2000-02-01", "2000-01-01"))

    def test_values_read_only(self):
        s = TimeSeries([1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 5.0


class TestLoadCsv:
    def test_yahoo_row(self, tmp_path):
        path = write_csv(tmp_path / "n225.csv", YAHOO,
                         ["1985-01-01,11542.0,11600.0,11500.0,11558.06,11558.06,0"])
        s = core.load_csv(path, "Adj Close")
        assert s.values.tolist() == [11558.06]
        assert s.labels == ("1985-01-01",)
        assert s.name == "n225"

    def test_header_only_is_empty(self, tmp_path):
        path = write_csv(tmp_path / "e.csv", YAHOO, [])
        with pytest.raises(EmptyDataError):
            core.load_csv(path, "Adj Close")

    def test_null_rows_dropped(self, tmp_path):
        path = write_csv(tmp_path / "n.csv", YAHOO, [
            "2000-01-01,1,1,1,1,1.5,0",
            "2000-02-01,null,null,null,null,null,null",
            "2000-03-01,1,1,1,1,2.5,0",
        ])
        s = core.load_csv(path, "Adj Close")
        assert len(s) == 2
        assert s.dropped == 1

    def test_fred_layout(self, tmp_path):
        path = write_csv(tmp_path / "fred.csv", "DATE,VALUE",
                         ["1967-01-01,33.1", "1967-02-01,.", "1967-03-01,33.4"])
        s = core.load_csv(path, "VALUE")
        assert s.values.tolist() == [33.1, 33.4]
        assert s.dropped == 1

    def test_missing_column(self, tmp_path):
        path = write_csv(tmp_path / "f.csv", "DATE,VALUE", ["1967-01-01,1"])
        with pytest.raises(SchemaError):
            core.load_csv(path, "Adj Close")

    def test_parse_error_names_row(self, tmp_path):
        path = write_csv(tmp_path / "f.csv", "DATE,VALUE", ["1967-01-01,1", "1967-02-01,abc"])
        with pytest.raises(ParseError, match="row 3") as info:
            core.load_csv(path, "VALUE")
        assert info.value.row == 3

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            core.load_csv(tmp_path / "nope.csv", "VALUE")

    def test_unordered_dates_rejected(self, tmp_path):
        path = write_csv(tmp_path / "f.csv", "DATE,VALUE", ["1967-02-01,1", "1967-01-01,2"])
        with pytest.raises(DomainError):
            core.load_csv(path, "VALUE")


class TestSplit:
    @pytest.mark.parametrize("name,train,test,total", TABLE1)
    def test_table1_rows(self, name, train, test, total):
        parts = core.split(TimeSeries(np.arange(total, dtype=float)), 0.70)
        assert (len(parts.train), len(parts.test)) == (train, test)

    def test_even_split(self):
        parts = core.split(TimeSeries(np.arange(10.0)), 0.5)
        assert len(parts.train) == 5 and len(parts.test) == 5
        assert parts.train.values[-1] == 4.0 and parts.test.values[0] == 5.0

    def test_exact_products_not_bumped(self):
        # 0.7 * 10 is 7.000000000000001 in binary floating point
        assert core.train_size(10, 0.7) == 7

    @pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1, 1.5])
    def test_fraction_domain(self, fraction):
        with pytest.raises(DomainError):
            core.split(TimeSeries(np.arange(10.0)), fraction)

    def test_empty_test_side(self):
        with pytest.raises(SplitError):
            core.split(TimeSeries([1.0, 2.0]), 0.9)

    @given(n=st.integers(2, 5000), fraction=st.floats(0.01, 0.99))
    def test_partition(self, n, fraction):
        s = TimeSeries(np.arange(n, dtype=float))
        try:
            parts = core.split(s, fraction)
        except SplitError:
            return
        assert len(parts.train) + len(parts.test) == n
        assert len(parts.train) == core.train_size(n, fraction)
        assert np.array_equal(np.concatenate([parts.train.values, parts.test.values]), s.values)


class TestDifference:
    @pytest.mark.parametrize("values,d,expected", [
        ([1, 3, 6], 1, [2, 3]),
        ([1, 3, 6], 0, [1, 3, 6]),
        ([1, 3, 6, 10], 2, [1, 1]),
    ])
    def test_examples(self, values, d, expected):
        assert core.difference(TimeSeries(values), d).values.tolist() == expected

    def test_too_many(self):
        with pytest.raises(DomainError):
            core.difference(TimeSeries([1.0, 2.0]), 2)

    def test_inverse_examples(self):
        assert core.inverse_difference(6, 4) == 10
        assert core.inverse_difference(3.25, 0) == 3.25
        delta = core.difference(TimeSeries([5.0, 9.0]), 1).values[0]
        assert core.inverse_difference(5.0, delta) == 9.0

    def test_inverse_rejects_nonfinite(self):
        with pytest.raises(DomainError):
            core.inverse_difference(1.0, float("inf"))

    @given(values=st.lists(st.floats(-1e4, 1e4), min_size=4, max_size=60), d=st.integers(0, 3))
    def test_cumulative_reconstruction(self, values, d):
        x = np.array(values)
        levels = [x]
        for _ in range(d):
            levels.append(np.diff(levels[-1]))
        w = core.difference(TimeSeries(x), d).values
        # rebuild each level from its first value and the next level's increments
        rebuilt = w
        for k in range(d - 1, -1, -1):
            out = [levels[k][0]]
            for delta in rebuilt:
                out.append(core.inverse_difference(out[-1], delta))
            rebuilt = np.array(out)
        assert np.max(np.abs(rebuilt - x)) <= 1e-9


class TestScaler:
    def setup_method(self):
        self.params = core.fit_scaler(TimeSeries([0.0, 10.0]))

    def test_midpoint(self):
        assert core.apply_scaler(self.params, 5.0) == 0.0

    def test_endpoints(self):
        assert core.apply_scaler(self.params, 10.0) == 1.0
        assert core.apply_scaler(self.params, 0.0) == -1.0

    def test_round_trip(self):
        assert core.invert_scaler(self.params, core.apply_scaler(self.params, 7.3)) == pytest.approx(7.3, abs=1e-12)

    def test_unclamped(self):
        assert core.apply_scaler(self.params, 20.0) == 3.0

    def test_constant_series(self):
        with pytest.raises(ScalerError):
            core.fit_scaler(TimeSeries([4.0, 4.0, 4.0]))

    def test_round_trip_1000_values(self, rng):
        params = core.fit_scaler(TimeSeries(rng.normal(50.0, 10.0, 200)))
        values = rng.uniform(-100.0, 200.0, 1000)
        back = core.invert_scaler(params, core.apply_scaler(params, values))
        rel = np.abs(back - values) / np.maximum(np.abs(values), 1.0)
        assert rel.max() < 1e-12


class TestSupervised:
    def test_lag1(self):
        pairs = core.to_supervised(TimeSeries([1.0, 2.0, 3.0, 4.0]), 1)
        assert [(x.tolist(), y) for x, y in pairs] == [([1.0], 2.0), ([2.0], 3.0), ([3.0], 4.0)]

    def test_lag2(self):
        pairs = core.to_supervised(TimeSeries([1.0, 2.0, 3.0, 4.0]), 2)
        assert [(x.tolist(), y) for x, y in pairs] == [([1.0, 2.0], 3.0), ([2.0, 3.0], 4.0)]

    def test_lag_too_long(self):
        with pytest.raises(DomainError):
            core.to_supervised(TimeSeries([1.0, 2.0]), 2)

    @given(n=st.integers(2, 80), data=st.data())
    def test_count(self, n, data):
        lag = data.draw(st.integers(1, n - 1))
        assert len(core.to_supervised(np.arange(n, dtype=float), lag)) == n - lag
