import json
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pafparse import FieldStack, builtin, detect_parts, parse_poses, render_scene_fields
from pafparse import io
from pafparse.errors import BadMagic, IoError, TopologyHashMismatch, VersionUnsupported
from pafparse.scenes import SceneSpec, random_scene


@pytest.fixture(scope="module")
def mini():
    topo = builtin("mini5")
    spec = SceneSpec(seed=3, n_people=(2, 2), scale=(24, 40), width=80, height=64, min_separation=6,
                     topology="mini5")
    scene = random_scene(spec, 0, topo)
    return topo, scene, render_scene_fields(scene, topo, 2.5, 3.0)


def test_roundtrip_bit_identical(tmp_path, mini):
    topo, _, stack = mini
    path = tmp_path / "f.paff"
    io.write_fields(stack, path, topo)
    back = io.read_fields(path)
    np.testing.assert_array_equal(back.confidence, stack.confidence)
    np.testing.assert_array_equal(back.paf, stack.paf)
    assert back.topology_hash == topo.hash
    assert io.fields_to_bytes(back, topo) == path.read_bytes()


def test_header_layout(mini):
    topo, _, stack = mini
    data = io.fields_to_bytes(stack, topo)
    magic, version, h, w, ch = struct.unpack_from("<4sHIII", data)
    assert (magic, version, h, w, ch) == (b"PAFF", 1, 64, 80, topo.n_channels)
    assert len(data) == 18 + 4 * ch * h * w + 8
    assert struct.unpack_from("<Q", data, len(data) - 8)[0] == topo.hash


@settings(max_examples=30, deadline=None)
@given(cut=st.integers(0, 200))
def test_truncated_never_partial(cut):
    topo = builtin("mini5")
    stack = FieldStack(np.zeros((5, 4, 3), np.float32), np.zeros((10, 4, 3), np.float32), topo.hash)
    data = io.fields_to_bytes(stack, topo)
    if cut >= len(data):
        return
    with pytest.raises((BadMagic, IoError)):
        io.fields_from_bytes(data[:cut])


def test_bad_magic_and_version(mini):
    topo, _, stack = mini
    data = bytearray(io.fields_to_bytes(stack, topo))
    with pytest.raises(BadMagic):
        io.fields_from_bytes(b"XXXX" + bytes(data[4:]))
    data[4] = 9
    with pytest.raises(VersionUnsupported):
        io.fields_from_bytes(bytes(data))


def test_channel_mismatch(mini, tmp_path):
    topo, _, stack = mini
    bad = FieldStack(stack.confidence, stack.paf[:-2], topo.hash)
    with pytest.raises(TopologyHashMismatch):
        io.write_fields(bad, tmp_path / "x.paff", topo)
    with pytest.raises(TopologyHashMismatch):
        io.fields_from_bytes(io.fields_to_bytes(stack, topo), builtin("coco18"))


def test_missing_file(tmp_path):
    with pytest.raises(IoError):
        io.read_fields(tmp_path / "nope.paff")


def test_atomic_write_leaves_no_temp(tmp_path):
    io.atomic_write(tmp_path / "a.bin", b"abc")
    assert [p.name for p in tmp_path.iterdir()] == ["a.bin"]


def test_json_documents(tmp_path, mini):
    topo, scene, stack = mini
    io.write_scene(scene, tmp_path / "s.json", topo)
    back = io.read_scene(tmp_path / "s.json", topo)
    np.testing.assert_array_equal(back.keypoints, scene.keypoints)
    cands = detect_parts(stack)
    d = json.loads(io.dump_json(io.candidates_to_dict(cands, topo)))
    assert io.candidates_from_dict(d, topo) == cands
    persons = parse_poses(cands, stack, topo)
    pose = io.poses_to_dict(persons, cands, topo)
    assert pose["topology"]["hash"] == f"{topo.hash:016x}"
    assert all(len(p["keypoints"]) == topo.n_parts for p in pose["people"])
    scores = [p["score"] for p in pose["people"]]
    assert scores == sorted(scores, reverse=True)
    with pytest.raises(TopologyHashMismatch):
        io.candidates_from_dict(d, builtin("coco18"))
