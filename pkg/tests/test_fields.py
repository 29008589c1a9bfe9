"""Tests for point-field extraction, trimming and rescaling."""

import numpy as np
import pytest

from kpzpf.fields import (
    AlreadyRescaledError,
    DegenerateMapError,
    MonotoneMap,
    PointField,
    TooFewPointsError,
    lower_field,
    rescale,
    trim,
    upper_field,
)


def _mm(starts, ends, n=4):
    return MonotoneMap(starts=np.asarray(starts, float), ends=np.asarray(ends, float), n=n)


def test_monotone_map_validates_ordering():
    with pytest.raises(ValueError):
        _mm([0, 1, 1], [0, 1, 2])
    with pytest.raises(ValueError):
        _mm([0, 1, 2], [1, 0, 2])


def test_upper_field_distinct_ends():
    field = upper_field(_mm([0, 1, 2], [5, 5, 7]))
    np.testing.assert_array_equal(field.positions, [5.0, 7.0])
    assert field.kind == "upper"


def test_upper_field_identity_map():
    starts = np.arange(-2.0, 3.0)
    field = upper_field(_mm(starts, starts))
    np.testing.assert_array_equal(field.positions, starts)


def test_upper_field_degenerate_when_all_ends_equal():
    with pytest.raises(DegenerateMapError):
        upper_field(_mm([0, 1, 2], [3, 3, 3]))


def test_lower_field_single_boundary():
    field = lower_field(_mm([0, 1, 2], [5, 5, 7]))
    np.testing.assert_array_equal(field.positions, [1.5])
    assert field.kind == "lower"


def test_lower_field_identity_map_midpoints():
    starts = np.arange(-2.0, 3.0)
    field = lower_field(_mm(starts, starts))
    np.testing.assert_array_equal(field.positions, [-1.5, -0.5, 0.5, 1.5])


def test_lower_field_last_start_placement():
    field = lower_field(_mm([0, 1, 2], [5, 5, 7]), placement="last_start")
    np.testing.assert_array_equal(field.positions, [1.0])


def test_lower_field_degenerate_without_boundaries():
    with pytest.raises(DegenerateMapError):
        lower_field(_mm([0, 1], [5, 5]))


def test_upper_is_one_longer_than_lower():
    rng = np.random.default_rng(3)
    for _ in range(50):
        starts = np.arange(20.0)
        ends = np.sort(rng.choice(np.arange(0.0, 8.0), size=20))
        if np.unique(ends).size < 2:
            continue
        mm = _mm(starts, ends)
        assert len(upper_field(mm)) == len(lower_field(mm)) + 1


def test_trim_removes_per_end():
    field = PointField(positions=np.arange(1.0, 11.0), kind="upper", n=4)
    np.testing.assert_array_equal(trim(field, 2).positions, np.arange(3.0, 9.0))


def test_trim_zero_is_identity():
    field = PointField(positions=np.arange(1.0, 5.0), kind="upper", n=4)
    np.testing.assert_array_equal(trim(field, 0).positions, field.positions)


def test_trim_too_few_points():
    field = PointField(positions=np.arange(4.0), kind="upper", n=4)
    with pytest.raises(TooFewPointsError):
        trim(field, 2)


def test_rescale_divides_by_n_to_two_thirds():
    field = PointField(positions=np.array([4.0, 8.0]), kind="upper", n=8)
    out = rescale(field)
    np.testing.assert_allclose(out.positions, [1.0, 2.0], rtol=1e-15)
    assert out.rescaled


def test_rescale_n1_is_identity():
    field = PointField(positions=np.array([2.0, 5.0]), kind="upper", n=1)
    np.testing.assert_array_equal(rescale(field).positions, [2.0, 5.0])


def test_rescale_twice_raises():
    field = rescale(PointField(positions=np.array([4.0, 8.0]), kind="upper", n=8))
    with pytest.raises(AlreadyRescaledError):
        rescale(field)


def test_trim_and_rescale_commute():
    field = PointField(positions=np.linspace(3.0, 40.0, 12), kind="lower", n=64)
    a = rescale(trim(field, 2)).positions
    b = trim(rescale(field), 2).positions
    np.testing.assert_array_equal(a, b)


def test_gaps_stay_positive_through_pipeline():
    rng = np.random.default_rng(8)
    positions = np.cumsum(rng.exponential(1.0, 30)) + 1.0
    field = PointField(positions=positions, kind="upper", n=256)
    out = rescale(trim(field, 2))
    assert np.all(np.diff(out.positions) > 0)
