import numpy as np
import pytest

from homotop import ValidationError
from homotop.ingest import (BONN_RATE_HZ, ChannelSet, TimeSeries, load_bonn_segment,
                            load_csv_matrix, select_channels, write_csv_matrix)


def test_bonn_segment_full_length(tmp_path):
    path = tmp_path / "Z001.txt"
    values = np.random.default_rng(0).integers(-500, 500, 4097)
    path.write_text("\n".join(str(v) for v in values) + "\n")
    ts = load_bonn_segment(path)
    assert len(ts) == 4097
    assert ts.rate == BONN_RATE_HZ == 173.61
    assert ts.label == "Z001"
    np.testing.assert_array_equal(ts.samples, values)


def test_bonn_segment_small_parse(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("1\n-2\n3")
    np.testing.assert_array_equal(load_bonn_segment(path).samples, [1, -2, 3])


def test_bonn_segment_blank_lines_and_whitespace(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("  4 \n\n5\n\n")
    np.testing.assert_array_equal(load_bonn_segment(path).samples, [4, 5])


def test_bonn_segment_empty(tmp_path):
    path = tmp_path / "e.txt"
    path.write_text("")
    with pytest.raises(ValidationError, match="zero samples"):
        load_bonn_segment(path)


def test_bonn_segment_bad_line_reports_number(tmp_path):
    path = tmp_path / "b.txt"
    path.write_text("1\n2\nabc\n")
    with pytest.raises(ValidationError, match="line 3"):
        load_bonn_segment(path)


def test_bonn_segment_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_bonn_segment(tmp_path / "nope.txt")


def test_csv_columns_shape(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("1,2,3,4\n5,6,7,8\n9,10,11,12\n")
    cs = load_csv_matrix(path, "columns")
    assert len(cs) == 4
    assert all(len(c) == 3 for c in cs)
    assert cs.labels == ["ch0", "ch1", "ch2", "ch3"]
    np.testing.assert_array_equal(cs[1].samples, [2, 6, 10])


def test_csv_rows_orientation_and_header(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("a,b\n1,2\n3,4\n")
    cs = load_csv_matrix(path, "columns")
    assert cs.labels == ["a", "b"]
    rows = tmp_path / "r.csv"
    rows.write_text("1,2,3\n4,5,6\n")
    cs = load_csv_matrix(rows, "rows")
    assert len(cs) == 2 and len(cs[0]) == 3


def test_csv_one_by_one(tmp_path):
    path = tmp_path / "one.csv"
    path.write_text("7\n")
    cs = load_csv_matrix(path)
    assert len(cs) == 1 and len(cs[0]) == 1


def test_csv_ragged(tmp_path):
    path = tmp_path / "rag.csv"
    path.write_text("1,2,3\n1,2,3,4\n")
    with pytest.raises(ValidationError, match="ragged row 2"):
        load_csv_matrix(path)


def test_csv_non_numeric_and_empty(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,x\n")
    with pytest.raises(ValidationError):
        load_csv_matrix(bad)
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValidationError, match="empty"):
        load_csv_matrix(empty)


def test_csv_round_trip_bit_exact(tmp_path, rng):
    chans = tuple(TimeSeries(rng.standard_normal(20) * 1e3, 1.0, f"c{i}") for i in range(3))
    cs = ChannelSet(chans, "X")
    path = tmp_path / "rt.csv"
    write_csv_matrix(cs, path)
    back = load_csv_matrix(path)
    for a, b in zip(cs, back):
        assert a.samples.tobytes() == b.samples.tobytes()
        assert a.label == b.label


def test_timeseries_invariants():
    with pytest.raises(ValidationError):
        TimeSeries([])
    with pytest.raises(ValidationError):
        TimeSeries([1.0, np.nan])
    with pytest.raises(ValidationError):
        TimeSeries([1.0], rate=0)


def test_channelset_invariants():
    a = TimeSeries([1.0], 1.0, "a")
    with pytest.raises(ValidationError):
        ChannelSet((a, TimeSeries([2.0], 2.0, "b")))
    with pytest.raises(ValidationError):
        ChannelSet((a, TimeSeries([2.0], 1.0, "a")))


def _hundred():
    return ChannelSet(tuple(TimeSeries([float(i)], 1.0, f"c{i:03d}") for i in range(100)), "D")


def test_select_channels_reproducible():
    cs = _hundred()
    a = select_channels(cs, 15, 7)
    b = select_channels(cs, 15, 7)
    assert len(a) == 15 and len(set(a.labels)) == 15
    assert a.labels == b.labels
    assert a.labels == sorted(a.labels)
    assert select_channels(cs, 15, 8).labels != a.labels


def test_select_channels_exhaustive_and_too_many():
    cs = ChannelSet(tuple(TimeSeries([float(i)], 1.0, f"c{i}") for i in range(15)))
    assert select_channels(cs, 15, 1).labels == cs.labels
    with pytest.raises(ValidationError):
        select_channels(cs, 16, 1)
