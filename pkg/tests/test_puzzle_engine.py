import json
from fractions import Fraction

import pytest

from gluing import angle_dynamics as ad
from gluing import puzzle_engine as pe


@pytest.fixture(scope="module")
def toy():
    return pe.toy_model(3)


def test_counts(toy):
    assert toy.counts() == [1, 2, 6, 22]


def test_pieces_have_images_one_level_up(toy):
    for n in (1, 2, 3):
        for p in toy.pieces[n]:
            assert p.image_id is not None and p.image_id[0] == n - 1
            assert p.parent_id is not None and p.parent_id[0] == n - 1


def test_children_partition_parent(toy):
    for n in (0, 1, 2):
        kids = [c for p in toy.pieces[n] for c in toy.children(p.id)]
        assert sorted(k.id for k in kids) == sorted(q.id for q in toy.pieces[n + 1])


def test_degree_counts_critical_points(toy):
    for p in toy.pieces[2]:
        assert p.degree == 1 + len(p.contains_critical)
    # the map has degree d1 + d2 - d0 = 4
    assert toy.map_degree == 4


def test_curve_pieces_partition_circle(toy):
    arcs = sorted(p.arc for p in toy.pieces[3] if p.arc is not None)
    total = sum((Fraction(b.fraction - a.fraction) % 1) or 1 for a, b in arcs)
    assert total == 1


def test_json_is_stable(toy):
    a = toy.to_json()
    assert a == pe.toy_model(3).to_json()
    obj = json.loads(a)
    assert len(obj["nodes"]) == sum(toy.counts())


def test_not_admissible():
    with pytest.raises(pe.GraphNotAdmissible):
        pe.initial_graph(2, 3, 3, ("1/3",))


def test_locate_angle(toy):
    assert pe.locate_angle(toy, "1/8", 2).id == (2, 1)
    assert pe.locate_angle(toy, 0.3, 2).id == (2, 2)
    assert "c_f" in pe.locate_angle(toy, "7/12", 2).contains_critical
    with pytest.raises(pe.OnGraphAmbiguous):
        pe.locate_angle(toy, "1/4", 2)


def test_itinerary_follows_doubling(toy):
    it = pe.itinerary(toy, "1/7", 2, 6)
    assert it[:3] == it[3:]


def test_renormalizable(toy):
    assert not pe.is_renormalizable(toy, "c_f", 3)
    assert pe.is_renormalizable(toy, {0: [(0, 1)] * 8, 1: [(1, 1), (1, 2)] * 4}, 1)
    with pytest.raises(ValueError):
        pe.is_renormalizable(toy, "c_missing", 2)


def test_glued_power_graph_counts():
    # each external ray continues as an internal ray, so every arc is a piece
    sys = pe.build(pe.initial_graph(2, 2, 2, ("0",)), (), 4)
    assert sys.counts() == [1, 2, 4, 8, 16]
