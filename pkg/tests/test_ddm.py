from hypothesis import given, settings
from hypothesis import strategies as st

from horomori.ddm import analyze_generated_cone, cone_intersection_rays, dual_description
from horomori.linalg import dot, is_zero, primitive

vectors3 = st.tuples(*[st.integers(min_value=-4, max_value=4)] * 3)


def test_orthant():
    rays, lin = dual_description([(1, 0), (0, 1)], 2)
    assert rays == [(0, 1), (1, 0)]
    assert not lin


def test_halfplane_has_lineality():
    rays, lin = dual_description([(1, 0)], 2)
    assert rays == [(1, 0)]
    assert len(lin) == 1
    assert primitive(lin[0]) in ((0, 1), (0, -1))


def test_equalities_restrict():
    rays, lin = dual_description([(1, 0, 0), (0, 1, 0)], 3,
                                 equalities=[(0, 0, 1)])
    assert rays == [(0, 1, 0), (1, 0, 0)]
    assert not lin


def test_square_cone_extreme_rays():
    g = analyze_generated_cone(
        [(1, 0, 1), (0, 1, 1), (-1, 0, 1), (0, -1, 1), (1, 1, 3)], 3)
    assert g.extreme_rays == ((-1, 0, 1), (0, -1, 1), (0, 1, 1), (1, 0, 1))
    assert not g.lineality
    assert g.contains((0, 0, 7))
    assert not g.contains((0, 0, -1))
    assert g.ray_members((2, 0, 2)) == (0,)


def test_lineality_detected():
    g = analyze_generated_cone([(1, 0), (-1, 0), (0, 1)], 2)
    assert g.lineality


def test_intersection():
    rays, lin = cone_intersection_rays([(1, 0), (1, 1)], [(1, 1), (0, 1)], 2)
    assert rays == [(1, 1)]
    assert not lin


@given(st.lists(vectors3, min_size=1, max_size=6))
@settings(max_examples=120, deadline=None)
def test_extreme_rays_generate_the_same_cone(gens):
    gens = [g for g in gens if not is_zero(g)]
    if not gens:
        return
    body = analyze_generated_cone(gens, 3)
    if body.lineality:
        return
    # every generator satisfies all facet inequalities
    for g in gens:
        assert body.contains(g)
    # every extreme ray is a generator direction
    gen_dirs = {primitive(g) for g in gens}
    for r in body.extreme_rays:
        assert r in gen_dirs
    # facets support the cone: each facet normal vanishes on some generator
    for f in body.facet_normals:
        assert all(dot(f, g) >= 0 for g in gens)
