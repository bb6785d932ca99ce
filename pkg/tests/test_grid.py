import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bluenoise.grid import (
    AxisGroup,
    MaskSpec,
    group_distance_sq,
    parse_groups,
    parse_sizes,
    toroidal_delta_sq,
)


def stbn_spec(x=64, y=64, t=16):
    return MaskSpec.spatiotemporal(x, y, t)


class TestToroidalDelta:
    def test_wraps(self):
        assert toroidal_delta_sq(2, 62, 64, True) == 16

    def test_identity(self):
        assert toroidal_delta_sq(5, 5, 64, True) == 0

    def test_antipodal(self):
        assert toroidal_delta_sq(0, 32, 64, True) == 1024

    def test_non_toroidal(self):
        assert toroidal_delta_sq(2, 62, 64, False) == 3600

    @given(st.data())
    @settings(max_examples=100, deadline=None)
    def test_symmetric_and_bounded(self, data):
        extent = data.draw(st.integers(1, 128))
        a = data.draw(st.integers(0, extent - 1))
        b = data.draw(st.integers(0, extent - 1))
        d = toroidal_delta_sq(a, b, extent, True)
        assert d == toroidal_delta_sq(b, a, extent, True)
        assert 0 <= d <= (extent / 2) ** 2
        assert (d == 0) == (a == b)


class TestGroupDistance:
    def test_in_plane(self):
        spec = stbn_spec()
        d = group_distance_sq((1, 1, 0), (4, 5, 7), spec.groups[0], spec)
        assert d == 25

    def test_zero_at_equal(self):
        spec = stbn_spec()
        for g in spec.groups:
            assert group_distance_sq((3, 4, 5), (3, 4, 5), g, spec) == 0

    def test_time_wrap(self):
        spec = stbn_spec()
        d = group_distance_sq((0, 0, 1), (0, 0, 15), spec.groups[1], spec)
        assert d == 4

    @given(st.data())
    @settings(max_examples=60, deadline=None)
    def test_symmetric_nonnegative(self, data):
        spec = stbn_spec(8, 8, 4)
        p = tuple(data.draw(st.integers(0, s - 1)) for s in spec.sizes)
        q = tuple(data.draw(st.integers(0, s - 1)) for s in spec.sizes)
        for g in spec.groups:
            d = group_distance_sq(p, q, g, spec)
            assert d == group_distance_sq(q, p, g, spec) >= 0
            proj_equal = all(p[a] == q[a] for a in g.axes)
            assert (d == 0) == proj_equal


class TestLinearize:
    def test_origin(self):
        spec = stbn_spec()
        assert spec.linearize((0, 0, 0)) == 0
        assert spec.delinearize(0) == (0, 0, 0)

    def test_last(self):
        spec = stbn_spec()
        n = spec.pixel_count
        assert spec.linearize((63, 63, 15)) == n - 1
        assert spec.delinearize(n - 1) == (63, 63, 15)

    def test_axis0_fastest(self):
        spec = stbn_spec()
        assert spec.linearize((1, 0, 0)) == 1
        assert spec.linearize((0, 1, 0)) == 64
        assert spec.linearize((0, 0, 1)) == 64 * 64

    @given(st.integers(0, 64 * 64 * 16 - 1))
    @settings(max_examples=200, deadline=None)
    def test_round_trip(self, i):
        spec = stbn_spec()
        assert spec.linearize(spec.delinearize(i)) == i

    def test_vectorized_matches_scalar(self):
        spec = MaskSpec.spatiotemporal(5, 7, 3)
        idx = np.arange(spec.pixel_count)
        coords = spec.delinearize_many(idx)
        for i in (0, 1, 17, 104):
            assert tuple(coords[i]) == spec.delinearize(i)

    def test_out_of_range_rejected(self):
        spec = stbn_spec()
        with pytest.raises(ValueError):
            spec.delinearize(spec.pixel_count)
        with pytest.raises(ValueError):
            spec.linearize((64, 0, 0))

    def test_numpy_layout_matches_linear_order(self):
        spec = MaskSpec.spatiotemporal(4, 3, 2)
        arr = np.arange(spec.pixel_count).reshape(spec.numpy_shape)
        for i in range(spec.pixel_count):
            x, y, z = spec.delinearize(i)
            assert arr[z, y, x] == i


class TestSpecValidation:
    def test_axes_must_partition(self):
        with pytest.raises(ValueError):
            MaskSpec((8, 8), (AxisGroup((0,)),))
        with pytest.raises(ValueError):
            MaskSpec((8, 8), (AxisGroup((0, 1)), AxisGroup((1,))))

    def test_density_bounds(self):
        with pytest.raises(ValueError):
            MaskSpec.single_group((8, 8), initial_density=0.0)
        with pytest.raises(ValueError):
            MaskSpec.single_group((8, 8), initial_density=0.6)
        MaskSpec.single_group((8, 8), initial_density=0.5)

    def test_sigma_positive(self):
        with pytest.raises(ValueError):
            AxisGroup((0,), sigma=0.0)

    def test_extent_positive(self):
        with pytest.raises(ValueError):
            MaskSpec.single_group((8, 0))

    def test_toroidal_flags_per_axis(self):
        g = AxisGroup((0, 1), 1.9, (True, False))
        assert g.toroidal_for(0) and not g.toroidal_for(1)
        with pytest.raises(ValueError):
            AxisGroup((0, 1), 1.9, (True,))


class TestParsers:
    def test_sizes(self):
        assert parse_sizes("64x64x16") == (64, 64, 16)
        with pytest.raises(ValueError):
            parse_sizes("64xx16")
        with pytest.raises(ValueError):
            parse_sizes("64x0")

    def test_groups(self):
        assert parse_groups("xy,z", 3) == ((0, 1), (2,))
        assert parse_groups("01,2,3", 4) == ((0, 1), (2,), (3,))
        with pytest.raises(ValueError):
            parse_groups("xy", 3)
        with pytest.raises(ValueError):
            parse_groups("xx", 2)
