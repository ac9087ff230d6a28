"""BVH ray queries against the all-triangles brute-force oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cityrt.mesh import TriangleMesh, build_bvh, make_box, make_icosphere

from .oracles import brute_force_hit


def random_soup(rng, n_tris, spread=1.0):
    base = rng.uniform(-spread, spread, size=(n_tris, 3))
    jitter = rng.uniform(-0.2, 0.2, size=(n_tris, 2, 3))
    v = np.concatenate([base[:, None, :], base[:, None, :] + jitter], axis=1).reshape(-1, 3)
    t = np.arange(3 * n_tris, dtype=np.int64).reshape(-1, 3)
    return TriangleMesh(v, t)


def random_rays(rng, n):
    o = rng.uniform(-2.0, 2.0, size=(n, 3))
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return o, d


def test_batch_matches_brute_force():
    rng = np.random.default_rng(42)
    soup = random_soup(rng, 300)
    bvh = build_bvh(soup)
    o, d = random_rays(rng, 800)
    t, tri, _, _ = bvh.intersect_batch(o, d)
    for i in range(o.shape[0]):
        t_ref, tri_ref = brute_force_hit(o[i], d[i], soup.vertices, soup.triangles)
        assert tri[i] == tri_ref
        if tri_ref >= 0:
            assert t[i] == pytest.approx(t_ref, rel=1e-9)
        else:
            assert np.isinf(t[i])


def test_axis_parallel_rays():
    rng = np.random.default_rng(3)
    soup = random_soup(rng, 120)
    bvh = build_bvh(soup)
    o = rng.uniform(-2, 2, size=(300, 3))
    d = np.zeros((300, 3))
    d[np.arange(300), rng.integers(0, 3, 300)] = rng.choice([-1.0, 1.0], 300)
    t, tri, _, _ = bvh.intersect_batch(o, d)
    for i in range(300):
        t_ref, tri_ref = brute_force_hit(o[i], d[i], soup.vertices, soup.triangles)
        assert tri[i] == tri_ref
        if tri_ref >= 0:
            assert t[i] == pytest.approx(t_ref, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_agreement_property(seed):
    rng = np.random.default_rng(seed)
    soup = random_soup(rng, 40)
    bvh = build_bvh(soup)
    o, d = random_rays(rng, 40)
    t, tri, _, _ = bvh.intersect_batch(o, d)
    for i in range(40):
        t_ref, tri_ref = brute_force_hit(o[i], d[i], soup.vertices, soup.triangles)
        assert tri[i] == tri_ref


def test_normal_faces_ray_origin():
    box = make_box((2.0, 2.0, 2.0), origin=(-1.0, -1.0, -1.0))
    bvh = build_bvh(box)
    for d in np.eye(3):
        hit = bvh.intersect(np.zeros(3), d)
        assert hit is not None
        assert hit.normal @ d < 0  # flipped toward the origin side
        assert hit.t == pytest.approx(1.0, rel=1e-12)
        assert np.allclose(hit.point, d)


def test_self_intersection_offset():
    box = make_box()
    bvh = build_bvh(box)
    # start exactly on the z=0 face shooting up: must hit the top, not the
    # surface we stand on
    hit = bvh.intersect(np.array([0.5, 0.5, 0.0]), np.array([0.0, 0.0, 1.0]))
    assert hit is not None
    assert hit.t == pytest.approx(1.0, rel=1e-9)


def test_tie_breaks_to_lowest_triangle():
    v = np.array([[0, 0, 1], [1, 0, 1], [0, 1, 1]], dtype=np.float64)
    mesh = TriangleMesh(np.vstack([v, v]), np.array([[0, 1, 2], [3, 4, 5]]))
    bvh = build_bvh(mesh)
    hit = bvh.intersect(np.array([0.2, 0.2, 0.0]), np.array([0.0, 0.0, 1.0]))
    assert hit.triangle == 0


def test_mesh_and_material_ids():
    a = make_box(origin=(0.0, 0.0, 0.0))
    b = make_box(origin=(5.0, 0.0, 0.0))
    bvh = build_bvh([a, b], materials=[7, 9])
    hit = bvh.intersect(np.array([5.5, 0.5, -1.0]), np.array([0.0, 0.0, 1.0]))
    assert hit.mesh == 1
    assert hit.material == 9
    hit = bvh.intersect(np.array([0.5, 0.5, -1.0]), np.array([0.0, 0.0, 1.0]))
    assert hit.mesh == 0
    assert hit.material == 7


def test_empty_bvh():
    bvh = build_bvh([])
    assert bvh.intersect(np.zeros(3), np.array([1.0, 0.0, 0.0])) is None
    t, tri, _, _ = bvh.intersect_batch(np.zeros((4, 3)), np.tile([1.0, 0, 0], (4, 1)))
    assert (tri == -1).all()


def test_occlusion_respects_t_max():
    box = make_box(origin=(2.0, -0.5, -0.5))
    bvh = build_bvh(box)
    o = np.zeros((2, 3))
    d = np.tile([1.0, 0.0, 0.0], (2, 1))
    blocked = bvh.occluded_batch(o, d, t_max=np.array([1.0, 5.0]))
    assert not blocked[0]  # box starts at x=2, beyond t_max=1
    assert blocked[1]


def test_big_sphere_batch():
    sph = make_icosphere(4)  # 5120 triangles
    bvh = build_bvh(sph)
    rng = np.random.default_rng(0)
    d = rng.normal(size=(20_000, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    o = np.zeros((20_000, 3))
    t, tri, _, _ = bvh.intersect_batch(o, d)
    assert (tri >= 0).all()  # from the center everything hits the shell
    assert np.all(np.abs(t - 1.0) < 0.01)  # icosphere radius, slight faceting
