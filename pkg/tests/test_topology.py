import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pafparse import builtin, classify_edges, load_topology, validate_topology
from pafparse.errors import (
    DisconnectedGraph,
    DuplicateLimb,
    DuplicatePart,
    SelfLoop,
    UnknownPartInLimb,
)
from pafparse.topology import BUILTIN, fnv1a_64


def test_coco18_shape(coco):
    assert (coco.n_parts, coco.n_limbs) == (18, 19)
    assert coco.n_channels == 18 + 38
    assert coco.parts[coco.root] == "neck"


def test_minimal_topology():
    t = validate_topology({"parts": ["a", "b"], "limbs": [["a", "b"]]})
    assert t.limbs == ((0, 1),)
    assert t.root == 0
    assert t.paf_channels(0) == (0, 1)


def test_unknown_part():
    with pytest.raises(UnknownPartInLimb):
        validate_topology({"parts": ["a", "b"], "limbs": [["a", "toe"]]})


@pytest.mark.parametrize("raw, exc", [
    ({"parts": ["a", "a"], "limbs": []}, DuplicatePart),
    ({"parts": ["a", "b"], "limbs": [["a", "a"]]}, SelfLoop),
    ({"parts": ["a", "b"], "limbs": [["a", "b"], ["b", "a"]]}, DuplicateLimb),
])
def test_invalid(raw, exc):
    with pytest.raises(exc):
        validate_topology(raw)


def test_tree_has_no_redundant_edges():
    t = builtin("coco18_tree")
    e = classify_edges(t)
    assert sorted(e.tree_edges) == list(range(t.n_limbs))
    assert not e.redundant_edges


def test_ear_shoulder_limbs_are_redundant(coco):
    e = classify_edges(coco)
    names = {tuple(sorted(coco.parts[i] for i in coco.limbs[c])) for c in e.redundant_edges}
    assert names == {("r_ear", "r_shoulder"), ("l_ear", "l_shoulder")}


def test_disconnected_lists_unreachable():
    t = validate_topology({"parts": ["a", "b", "c", "d"], "limbs": [["a", "b"], ["c", "d"]]})
    with pytest.raises(DisconnectedGraph) as info:
        classify_edges(t)
    assert sorted(info.value.unreachable) == ["c", "d"]


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_builtins_are_spanning(name):
    t = builtin(name)
    e = classify_edges(t)
    assert len(e.tree_edges) == t.n_parts - 1
    assert len(e.tree_edges) + len(e.redundant_edges) == t.n_limbs
    assert classify_edges(t) == e


def test_fnv_known_vectors():
    assert fnv1a_64(b"") == 0xCBF29CE484222325
    assert fnv1a_64(b"a") == 0xAF63DC4C8601EC8C


def test_hash_ignores_key_order_and_name(tmp_path, coco):
    d = coco.to_dict()
    path = tmp_path / "t.json"
    path.write_text(json.dumps(dict(reversed(list(d.items())))))
    again = load_topology(path)
    assert again.hash == coco.hash
    assert load_topology("coco18").hash == coco.hash


@st.composite
def random_graphs(draw):
    n = draw(st.integers(2, 9))
    parts = [f"p{i}" for i in range(n)]
    limbs = set()
    for i in range(1, n):  # random spanning tree
        limbs.add((draw(st.integers(0, i - 1)), i))
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=6))
    for a, b in extra:
        if a != b and (a, b) not in limbs and (b, a) not in limbs:
            limbs.add((a, b))
    order = draw(st.permutations(sorted(limbs)))
    return {"parts": parts, "limbs": [[parts[a], parts[b]] for a, b in order]}


@settings(max_examples=80, deadline=None)
@given(random_graphs())
def test_tree_edges_span(raw):
    t = validate_topology(raw)
    e = classify_edges(t)
    assert len(e.tree_edges) == t.n_parts - 1
    # tree edges alone connect every part
    seen = {t.root}
    changed = True
    while changed:
        changed = False
        for c in e.tree_edges:
            a, b = t.limbs[c]
            if (a in seen) != (b in seen):
                seen |= {a, b}
                changed = True
    assert len(seen) == t.n_parts
    assert set(e.tree_edges).isdisjoint(e.redundant_edges)
