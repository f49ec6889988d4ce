"""Binary field files and JSON scene / candidate / pose files.

Field file layout (all little-endian)::

    b"PAFF" | u16 version=1 | u32 height | u32 width | u32 channels
    | float32[channels][height][width] | u64 topology hash

Channels are the J confidence maps followed by the 2C PAF planes.
Every write goes to a temporary file in the target directory first and is
renamed into place.
"""
from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import BadMagic, IoError, TopologyHashMismatch, VersionUnsupported
from .fields import FieldStack, Scene
from .topology import BUILTIN, SkeletonTopology, builtin

MAGIC = b"PAFF"
VERSION = 1
_HEADER = struct.Struct("<4sHIII")
_TRAILER = struct.Struct("<Q")


def atomic_write(path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fields_to_bytes(stack: FieldStack, topology: SkeletonTopology | None = None) -> bytes:
    h = stack.topology_hash if topology is None else topology.hash
    if h is None:
        raise TopologyHashMismatch("field stack carries no topology hash")
    if topology is not None:
        if stack.topology_hash is not None and stack.topology_hash != topology.hash:
            raise TopologyHashMismatch("stack was rendered for a different topology")
        if stack.n_channels != topology.n_channels:
            raise TopologyHashMismatch(
                f"stack has {stack.n_channels} channels, topology needs {topology.n_channels}")
    payload = np.concatenate([stack.confidence, stack.paf]).astype("<f4", copy=False)
    return (_HEADER.pack(MAGIC, VERSION, stack.height, stack.width, payload.shape[0])
            + payload.tobytes(order="C") + _TRAILER.pack(h))


def write_fields(stack: FieldStack, path, topology: SkeletonTopology | None = None) -> None:
    atomic_write(path, fields_to_bytes(stack, topology))


def _topology_for_hash(h: int) -> SkeletonTopology | None:
    for name in BUILTIN:
        topo = builtin(name)
        if topo.hash == h:
            return topo
    return None


def fields_from_bytes(data: bytes, topology: SkeletonTopology | None = None, stride: int = 1) -> FieldStack:
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic("not a field file")
    if len(data) < _HEADER.size:
        raise IoError("truncated header")
    _, version, height, width, channels = _HEADER.unpack_from(data)
    if version != VERSION:
        raise VersionUnsupported(f"field file version {version}")
    n = channels * height * width
    if len(data) != _HEADER.size + 4 * n + _TRAILER.size:
        raise IoError(f"expected {_HEADER.size + 4 * n + _TRAILER.size} bytes, got {len(data)}")
    (h,) = _TRAILER.unpack_from(data, _HEADER.size + 4 * n)
    if topology is None:
        topology = _topology_for_hash(h)
        if topology is None:
            raise TopologyHashMismatch(f"unknown topology hash {h:#018x}; pass the topology")
    if topology.hash != h:
        raise TopologyHashMismatch(f"file hash {h:#018x} != topology hash {topology.hash:#018x}")
    if channels != topology.n_channels:
        raise TopologyHashMismatch(f"file has {channels} channels, topology needs {topology.n_channels}")
    arr = np.frombuffer(data, dtype="<f4", count=n, offset=_HEADER.size).reshape(channels, height, width)
    arr = arr.astype(np.float32)
    J = topology.n_parts
    return FieldStack(arr[:J].copy(), arr[J:].copy(), h, stride)


def read_fields(path, topology: SkeletonTopology | None = None, stride: int = 1) -> FieldStack:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return fields_from_bytes(data, topology, stride)


def topology_ref(topology: SkeletonTopology) -> dict:
    return {"name": topology.name, "hash": f"{topology.hash:016x}"}


def dump_json(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def write_json(obj, path) -> None:
    atomic_write(path, dump_json(obj).encode("utf-8"))


def write_scene(scene: Scene, path, topology: SkeletonTopology | None = None) -> None:
    d = scene.to_dict()
    if topology is not None:
        d["topology"] = topology_ref(topology)
    write_json(d, path)


def read_scene(path, topology: SkeletonTopology | None = None) -> Scene:
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    return Scene.from_dict(d, topology.n_parts if topology else None)


def candidates_to_dict(candidates, topology: SkeletonTopology) -> dict:
    return {
        "topology": topology_ref(topology),
        "candidates": [[[c.x, c.y, c.score] for c in cands] for cands in candidates],
    }


def candidates_from_dict(d: dict, topology: SkeletonTopology):
    from .detect import PartCandidate

    ref = d.get("topology", {}).get("hash")
    if ref is not None and int(ref, 16) != topology.hash:
        raise TopologyHashMismatch("candidate file was produced for a different topology")
    rows = d["candidates"]
    if len(rows) != topology.n_parts:
        raise TopologyHashMismatch(f"{len(rows)} candidate lists for {topology.n_parts} parts")
    return [[PartCandidate(j, m, float(x), float(y), float(s)) for m, (x, y, s) in enumerate(row)]
            for j, row in enumerate(rows)]


def poses_to_dict(persons, candidates, topology: SkeletonTopology) -> dict:
    """PoseFile document; people keep their (descending score) order."""
    return {
        "topology": topology_ref(topology),
        "people": [{"score": p.score, "keypoints": p.keypoints(candidates)} for p in persons],
    }
