import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plap.errors import DomainError, SamplingError
from plap.geometry import (
    DensityModel,
    Domain,
    LabelSet,
    NeighborIndex,
    PointCloud,
    build_index,
    cloud_with_labels,
    delta_n,
    epsilon_schedule,
    radius_neighbors,
    radius_neighbors_all,
    read_cloud_csv,
    read_field_csv,
    read_labels_csv,
    sample_cloud,
    write_cloud_csv,
    write_field_csv,
    write_labels_csv,
)

from conftest import uniform_cloud


def brute_neighbors(points, i, r):
    dist = np.sqrt(((points - points[i]) ** 2).sum(axis=1))
    return np.nonzero(dist <= r)[0]


# -- domains and densities ---------------------------------------------------

def test_domain_rejects_unknown_kind():
    with pytest.raises(DomainError):
        Domain("torus", 2)


def test_ball_volume_and_membership():
    ball = Domain("unit_ball", 3)
    assert ball.volume == pytest.approx(4 / 3 * math.pi)
    assert ball.contains(np.array([[1.0, 0, 0], [0.8, 0.7, 0]])).tolist() == [True, False]


def test_distance_to_boundary_box():
    box = Domain("unit_box", 2)
    assert box.distance_to_boundary(np.array([[0.3, 0.9]]))[0] == pytest.approx(0.1)


def test_ramp_density_only_on_box():
    with pytest.raises(DomainError):
        DensityModel.ramp(Domain("unit_ball", 2))


# -- sampling ------------------------------------------------------------------

def test_sample_is_seed_deterministic(box1):
    a = sample_cloud(4, box1, DensityModel.uniform(box1), 7)
    b = sample_cloud(4, box1, DensityModel.uniform(box1), 7)
    assert a.n == 4
    assert np.array_equal(a.points, b.points)
    assert np.all((a.points >= 0) & (a.points <= 1))


def test_uniform_half_box_mass(box2):
    cloud = sample_cloud(1000, box2, DensityModel.uniform(box2), 3)
    mass = np.mean(cloud.points[:, 0] <= 0.5)
    assert 0.45 <= mass <= 0.55


def test_linear_density_mean(box1):
    density = DensityModel(lambda x: 2 * np.atleast_2d(x)[:, 0], lambda x: np.full_like(x, 2.0), 2.0, "linear")
    cloud = sample_cloud(1000, box1, density, 11)
    assert 0.63 <= cloud.points.mean() <= 0.70


def test_ball_samples_stay_inside():
    cloud = uniform_cloud(500, d=3, seed=2, kind="unit_ball")
    assert np.all(np.linalg.norm(cloud.points, axis=1) <= 1)


def test_loose_upper_bound_aborts(box2):
    density = DensityModel(lambda x: np.full(len(x), 1.0), lambda x: np.zeros_like(x), 1e6, "loose")
    with pytest.raises(SamplingError, match="density upper bound too loose"):
        sample_cloud(100, box2, density, 0)


def test_density_above_bound_detected(box2):
    density = DensityModel(lambda x: np.full(len(x), 2.0), lambda x: np.zeros_like(x), 1.0, "liar")
    with pytest.raises(SamplingError):
        sample_cloud(10, box2, density, 0)


def test_cloud_with_labels_puts_labels_first(box1):
    cloud, labels = cloud_with_labels(box1, [0.25, 0.75], [0.0, 1.0], 50, DensityModel.uniform(box1), 1)
    assert cloud.n == 50
    assert cloud.points[:2, 0].tolist() == [0.25, 0.75]
    assert labels.indices.tolist() == [0, 1]


# -- invariants of the value types ---------------------------------------------

def test_point_cloud_validation(box2):
    with pytest.raises(DomainError):
        PointCloud(np.array([[0.5, 0.5]]), box2)
    with pytest.raises(DomainError):
        PointCloud(np.array([[0.5, 0.5], [1.5, 0.2]]), box2)
    with pytest.raises(DomainError):
        PointCloud(np.array([[0.5, np.nan], [0.2, 0.2]]), box2)


def test_point_cloud_is_read_only():
    cloud = uniform_cloud(10)
    with pytest.raises(ValueError):
        cloud.points[0, 0] = 0.3


def test_label_set_validation():
    with pytest.raises(ValueError):
        LabelSet([0, 0], [1.0, 2.0])
    with pytest.raises(ValueError):
        LabelSet([0], [np.inf])
    with pytest.raises(ValueError):
        LabelSet([0, 1], [1.0, 2.0]).validate(2)


# -- spatial index ---------------------------------------------------------------

def test_single_point_single_bucket():
    cloud = PointCloud(np.array([[0.0], [0.0]]), Domain("unit_box", 1))
    index = build_index(cloud, 1.0)
    assert list(index.buckets) == [(0,)]


def test_two_points_two_buckets():
    cloud = PointCloud(np.array([[0.1], [0.9]]), Domain("unit_box", 1))
    assert len(build_index(cloud, 0.5).buckets) == 2


@pytest.mark.parametrize("cell", [0.03, 0.1, 0.37, 2.0])
def test_buckets_partition_nodes(cell):
    cloud = uniform_cloud(100, seed=4)
    index = build_index(cloud, cell)
    members = np.concatenate(list(index.buckets.values()))
    assert np.array_equal(np.sort(members), np.arange(100))
    for key, bucket in index.buckets.items():
        assert np.all(np.floor(cloud.points[bucket] / cell) == np.array(key))


def test_closed_ball_convention():
    cloud = PointCloud(np.array([[0.0], [0.5], [1.0]]), Domain("unit_box", 1))
    index = build_index(cloud, 0.5)
    assert radius_neighbors(index, cloud, 1, 0.5).tolist() == [0, 1, 2]
    assert radius_neighbors(index, cloud, 1, 0.49).tolist() == [1]


@settings(max_examples=100, deadline=None)
@given(n=st.integers(2, 500), d=st.integers(1, 3), seed=st.integers(0, 10_000),
       r=st.floats(0.01, 0.6), cell=st.floats(0.02, 0.8))
def test_radius_query_matches_brute_force(n, d, seed, r, cell):
    cloud = uniform_cloud(n, d=d, seed=seed)
    index = build_index(cloud, cell)
    ptr, idx = radius_neighbors_all(index, cloud, r)
    for i in range(0, n, max(1, n // 7)):
        expected = brute_neighbors(cloud.points, i, r)
        assert np.array_equal(radius_neighbors(index, cloud, i, r), expected)
        assert np.array_equal(idx[ptr[i]:ptr[i + 1]], expected)


def test_radius_neighbors_symmetric_and_reflexive():
    cloud = uniform_cloud(300, seed=9)
    ptr, idx = radius_neighbors_all(build_index(cloud, 0.1), cloud, 0.1)
    pairs = {(i, int(j)) for i in range(cloud.n) for j in idx[ptr[i]:ptr[i + 1]]}
    assert all((i, i) in pairs for i in range(cloud.n))
    assert all((j, i) in pairs for i, j in pairs)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_small_radius_scans_at_most_3_to_the_d_buckets(d):
    cloud = uniform_cloud(200, d=d, seed=5)
    index = build_index(cloud, 0.2)

    class Counting(dict):
        lookups = 0

        def get(self, key, default=None):
            Counting.lookups += 1
            return super().get(key, default)

    counted = NeighborIndex(index.cell_size, Counting(index.buckets), index.cells)
    radius_neighbors(counted, cloud, 0, 0.2)
    assert Counting.lookups <= 3 ** d


# -- schedules -----------------------------------------------------------------

def test_delta_n_direct_formula():
    assert delta_n(math.e ** 2, 3) == pytest.approx((2 / math.e ** 2) ** (1 / 3), rel=1e-12)
    assert delta_n(math.e ** 4, 2) == pytest.approx(4 ** 0.75 / math.e ** 2, rel=1e-12)
    assert delta_n(math.e ** 4, 2) == pytest.approx(0.38278, abs=1e-5)


def test_delta_n_rejects_d1():
    with pytest.raises(ValueError, match="delta schedule undefined below d=2"):
        delta_n(100, 1)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_delta_n_decreasing(d):
    for n in [8, 16, 100, 1000, 10 ** 5]:
        assert delta_n(2 * n, d) < delta_n(n, d)


def test_epsilon_schedule_composes():
    assert epsilon_schedule(10 ** 4, 2) == pytest.approx(1.5 * delta_n(10 ** 4, 2) ** 0.4, rel=1e-14)


def test_epsilon_schedule_d1_uses_d2_formula():
    assert epsilon_schedule(1000, 1, 0.1) == pytest.approx(0.1 * delta_n(1000, 2) ** 0.4)


def test_critical_exponent_rejected():
    with pytest.raises(ValueError):
        epsilon_schedule(1000, 2, 1.0, 0.5)


def test_epsilon_over_sqrt_delta_diverges():
    ratios = [epsilon_schedule(10 ** k, 2) / math.sqrt(delta_n(10 ** k, 2)) for k in range(3, 9)]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))


def test_epsilon_exceeds_domain():
    with pytest.raises(DomainError, match="epsilon exceeds domain"):
        epsilon_schedule(10, 2, amplitude=5.0)


# -- persistence ---------------------------------------------------------------

def test_cloud_csv_roundtrip(tmp_path):
    cloud = uniform_cloud(25, d=2, seed=3)
    path = tmp_path / "cloud.csv"
    write_cloud_csv(path, cloud)
    raw = path.read_bytes()
    assert raw.startswith(b"id,x0,x1\n") and b"\r" not in raw
    back = read_cloud_csv(path, cloud.domain)
    assert np.array_equal(back.points, cloud.points)


def test_label_and_field_csv_roundtrip(tmp_path):
    labels = LabelSet([3, 1], [0.1, 1 / 3])
    write_labels_csv(tmp_path / "l.csv", labels)
    back = read_labels_csv(tmp_path / "l.csv")
    assert back.indices.tolist() == [3, 1] and np.array_equal(back.values, labels.values)
    u = np.random.default_rng(0).random(7)
    write_field_csv(tmp_path / "u.csv", u)
    ids, vals = read_field_csv(tmp_path / "u.csv")
    assert np.array_equal(ids, np.arange(7)) and np.array_equal(vals, u)


def test_cloud_csv_rejects_gapped_ids(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,x0\n0,0.1\n2,0.2\n")
    with pytest.raises(ValueError):
        read_cloud_csv(path, Domain("unit_box", 1))
