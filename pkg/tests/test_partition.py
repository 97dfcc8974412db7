import numpy as np
import pytest

from fractconv.errors import AddressCapExceeded, InvalidArgument, OutOfDomain
from fractconv.partition import (
    Partition,
    address_grid,
    locate_subinterval,
    locate_subintervals,
    make_affine_maps,
    make_uniform_partition,
    map_forward,
    map_inverse,
)


@pytest.mark.parametrize(
    "interval,N,nodes",
    [
        ((0, 3), 6, (0, 0.5, 1, 1.5, 2, 2.5, 3)),
        ((0, 1), 2, (0, 0.5, 1)),
        ((-1, 1), 4, (-1, -0.5, 0, 0.5, 1)),
    ],
)
def test_uniform_nodes(interval, N, nodes):
    assert make_uniform_partition(interval, N).nodes == pytest.approx(nodes, abs=1e-15)


@pytest.mark.parametrize(
    "interval,N", [((0, 1), 1), ((1, 1), 3), ((2, 1), 3), ((0, float("inf")), 3), ((0, 1), 2.5)]
)
def test_uniform_rejects(interval, N):
    with pytest.raises(InvalidArgument):
        make_uniform_partition(interval, N)


def test_partition_rejects_unsorted_nodes():
    with pytest.raises(InvalidArgument):
        Partition((0.0, 2.0, 1.0, 3.0))


def test_affine_maps_uniform():
    m = make_affine_maps(make_uniform_partition((0, 3), 6))
    assert m.slopes == pytest.approx([1 / 6] * 6)
    assert m.intercepts == pytest.approx([0, 0.5, 1, 1.5, 2, 2.5])


def test_affine_maps_nonuniform():
    m = make_affine_maps(Partition((0.0, 0.25, 1.0)))
    assert m.slopes == pytest.approx([0.25, 0.75])
    assert m.intercepts == pytest.approx([0.0, 0.25])


def test_slopes_sum_to_one_and_endpoints():
    rng = np.random.default_rng(3)
    for _ in range(20):
        nodes = np.sort(rng.uniform(-5, 5, rng.integers(3, 12)))
        p = Partition(tuple(nodes))
        m = make_affine_maps(p)
        assert abs(sum(m.slopes) - 1) <= 1e-12
        assert max(m.slopes) < 1
        for n in range(1, p.N + 1):
            assert abs(map_forward(m, n, p.lo) - p.nodes[n - 1]) <= 1e-12 * p.length
            assert abs(map_forward(m, n, p.hi) - p.nodes[n]) <= 1e-12 * p.length


def test_locate_convention():
    p = make_uniform_partition((0, 3), 6)
    assert locate_subinterval(p, 0.5) == 1
    assert locate_subinterval(p, 0.500001) == 2
    assert locate_subinterval(p, 0.0) == 1
    assert locate_subinterval(p, 3.0) == 6
    assert list(locate_subintervals(p, [0, 0.5, 0.500001, 3])) == [1, 1, 2, 6]
    with pytest.raises(OutOfDomain):
        locate_subinterval(p, 3.1)


def test_forward_inverse_examples():
    m = make_affine_maps(make_uniform_partition((0, 3), 6))
    assert map_forward(m, 1, 3) == 0.5
    assert map_inverse(m, 1, 0.5) == 3
    assert map_forward(m, 4, 0) == 1.5
    with pytest.raises(OutOfDomain):
        map_inverse(m, 1, 1.0)
    with pytest.raises(InvalidArgument):
        map_forward(m, 7, 0.0)


def test_round_trip_and_location():
    p = Partition((0.0, 0.3, 1.1, 1.5, 3.0))
    m = make_affine_maps(p)
    rng = np.random.default_rng(0)
    ts = rng.uniform(p.lo, p.hi, 10_000)
    for n in range(1, p.N + 1):
        xs = m.forward(n, ts)
        assert np.max(np.abs(m.inverse(n, xs) - ts)) <= 1e-12 * p.length
        interior = (ts > p.lo) & (ts < p.hi)
        assert np.all(locate_subintervals(p, xs[interior]) == n)


def test_address_grid_examples():
    p1 = make_uniform_partition((0, 1), 2)
    m1 = make_affine_maps(p1)
    g0 = address_grid(make_affine_maps(make_uniform_partition((0, 3), 6)), 0, [0, 3])
    assert list(g0.points) == [0, 3]
    assert [a.address for a in g0] == [(), ()]
    assert sorted(address_grid(m1, 1, [0, 1]).points) == [0, 0.5, 0.5, 1]
    assert sorted(address_grid(m1, 2, [0]).points) == [0, 0.25, 0.5, 0.75]


def test_address_grid_inverse_recovers_base():
    p = Partition((0.0, 0.4, 1.0, 2.0))
    m = make_affine_maps(p)
    base = [0.1, 1.7]
    g = address_grid(m, 3, base)
    assert len(g) == 27 * 2
    for ap, bi in zip(g, g.base_index):
        x = ap.point
        for n in ap.address:
            x = m.inverse(n, x)
        assert abs(x - base[bi]) <= 1e-12


def test_address_cap():
    m = make_affine_maps(make_uniform_partition((0, 1), 4))
    with pytest.raises(AddressCapExceeded):
        address_grid(m, 10, [0.0], cap=1000)
