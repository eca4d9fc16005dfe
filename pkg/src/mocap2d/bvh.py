"""BVH parsing, serialization, resampling and forward kinematics.

Conventions: right-handed, Y-up, +Z toward the viewer.  Rotation channels are
intrinsic, in degrees, and applied in the order the joint declares them.
Motion columns follow depth-first (pre-order) hierarchy order.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from ._numfmt import fmt
from .errors import (
    ChannelCountMismatch,
    DuplicateJointName,
    FrameCountMismatch,
    FrameOutOfRange,
    InvalidFps,
    MalformedHierarchy,
    MalformedMotion,
    MissingMotionSection,
)

POSITION_CHANNELS = ("Xposition", "Yposition", "Zposition")
ROTATION_CHANNELS = ("Xrotation", "Yrotation", "Zrotation")
CHANNEL_NAMES = POSITION_CHANNELS + ROTATION_CHANNELS
_AXIS = {"X": 0, "Y": 1, "Z": 2}

END_SUFFIX = "_End"


@dataclass
class BvhJoint:
    name: str
    offset: tuple[float, float, float] = (0.0, 0.0, 0.0)
    channels: tuple[str, ...] = ()
    children: list["BvhJoint"] = field(default_factory=list)
    end_site_offset: tuple[float, float, float] | None = None

    @property
    def end_site_name(self):
        return self.name + END_SUFFIX if self.end_site_offset is not None else None

    def walk(self) -> Iterator["BvhJoint"]:
        """Depth-first pre-order traversal (the motion column order)."""
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass
class BvhMotion:
    frame_time: float
    frames: np.ndarray  # (frame_count, channel_count)

    @property
    def frame_count(self):
        return int(self.frames.shape[0])

    @property
    def fps(self):
        return 1.0 / self.frame_time

    @property
    def duration(self):
        return max(self.frame_count - 1, 0) * self.frame_time


@dataclass
class BvhDocument:
    root: BvhJoint
    motion: BvhMotion

    def joints(self) -> list[BvhJoint]:
        return list(self.root.walk())

    def joint(self, name) -> BvhJoint:
        for j in self.root.walk():
            if j.name == name:
                return j
        raise KeyError(name)

    @property
    def channel_count(self):
        return sum(len(j.channels) for j in self.root.walk())

    def channel_columns(self) -> dict[str, slice]:
        """Column slice of every joint's channels in the motion rows."""
        cols, start = {}, 0
        for j in self.root.walk():
            cols[j.name] = slice(start, start + len(j.channels))
            start += len(j.channels)
        return cols

    def node_names(self) -> list[str]:
        """Joint and end-site names in the order FK reports them."""
        return [name for name, _ in _node_order(self.root)]

    def parents(self) -> dict[str, str | None]:
        out = {self.root.name: None}
        for j in self.root.walk():
            for c in j.children:
                out[c.name] = j.name
            if j.end_site_offset is not None:
                out[j.end_site_name] = j.name
        return out


@dataclass(frozen=True)
class JointPose:
    joint_name: str
    world_position: np.ndarray
    world_rotation: np.ndarray


def _node_order(root):
    """(name, joint-or-None) where None-joint entries are end sites."""
    out = []

    def visit(j):
        out.append((j.name, j))
        for c in j.children:
            visit(c)
        if j.end_site_offset is not None:
            out.append((j.end_site_name, None))

    visit(root)
    return out


# -- parsing ---------------------------------------------------------------

def _floats(tokens, what):
    try:
        return tuple(float(t) for t in tokens)
    except ValueError as exc:
        raise MalformedHierarchy(f"bad number in {what}: {exc}") from None


class _Tokens:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def next(self, expect=None):
        if self.pos >= len(self.tokens):
            raise MalformedHierarchy(f"unexpected end of hierarchy (wanted {expect or 'token'})")
        tok = self.tokens[self.pos]
        self.pos += 1
        if expect is not None and tok != expect:
            raise MalformedHierarchy(f"expected {expect!r}, got {tok!r}")
        return tok

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None


def _parse_joint(tk: _Tokens, name, is_root, seen):
    if name in seen:
        raise DuplicateJointName(name)
    seen.add(name)
    tk.next("{")
    tk.next("OFFSET")
    offset = _floats([tk.next() for _ in range(3)], f"OFFSET of {name}")
    channels: tuple[str, ...] = ()
    children: list[BvhJoint] = []
    end_site = None
    if tk.peek() == "CHANNELS":
        tk.next()
        try:
            n = int(tk.next())
        except ValueError:
            raise MalformedHierarchy(f"bad CHANNELS count in {name}") from None
        if not 0 <= n <= 6:
            raise MalformedHierarchy(f"{name}: {n} channels (0-6 allowed)")
        channels = tuple(tk.next() for _ in range(n))
        for c in channels:
            if c not in CHANNEL_NAMES:
                raise MalformedHierarchy(f"{name}: unknown channel {c!r}")
        if len(set(channels)) != len(channels):
            raise MalformedHierarchy(f"{name}: repeated channel")
    while True:
        tok = tk.next()
        if tok == "}":
            break
        if tok == "JOINT":
            children.append(_parse_joint(tk, tk.next(), False, seen))
        elif tok == "End":
            tk.next("Site")
            if end_site is not None:
                raise MalformedHierarchy(f"{name}: more than one End Site")
            tk.next("{")
            tk.next("OFFSET")
            end_site = _floats([tk.next() for _ in range(3)], f"End Site of {name}")
            tk.next("}")
        else:
            raise MalformedHierarchy(f"{name}: unexpected token {tok!r}")
    if not children and end_site is None:
        raise MalformedHierarchy(f"{name}: leaf joint without End Site")
    return BvhJoint(name, offset, channels, children, end_site)


def parse_bvh(text: str) -> BvhDocument:
    """Parse BVH text into a :class:`BvhDocument`."""
    text = text.lstrip("﻿")
    m = re.search(r"^\s*MOTION\s*$", text, flags=re.MULTILINE)
    if m is None:
        raise MissingMotionSection("no MOTION section")
    head, body = text[: m.start()], text[m.end():]
    tk = _Tokens(head.split())
    tk.next("HIERARCHY")
    tk.next("ROOT")
    seen: set[str] = set()
    root = _parse_joint(tk, tk.next(), True, seen)
    if tk.peek() is not None:
        raise MalformedHierarchy(f"unexpected token after root: {tk.peek()!r}")
    for j in root.walk():
        if j.end_site_offset is not None and j.end_site_name in seen:
            raise DuplicateJointName(j.end_site_name)

    lines = [ln.strip() for ln in body.splitlines()]
    lines = [ln for ln in lines if ln]
    if len(lines) < 2:
        raise MissingMotionSection("MOTION section lacks Frames/Frame Time")
    fm = re.fullmatch(r"Frames:\s*(\S+)", lines[0])
    tm = re.fullmatch(r"Frame\s+Time:\s*(\S+)", lines[1])
    if fm is None or tm is None:
        raise MissingMotionSection("MOTION section lacks Frames/Frame Time")
    try:
        frame_count = int(fm.group(1))
        frame_time = float(tm.group(1))
    except ValueError:
        raise MalformedMotion("bad Frames or Frame Time value") from None
    if frame_count < 0 or not frame_time > 0:
        raise MalformedMotion(f"Frames={frame_count}, Frame Time={frame_time}")

    n_channels = sum(len(j.channels) for j in root.walk())
    rows = lines[2:]
    if len(rows) != frame_count:
        raise FrameCountMismatch(f"header says {frame_count} frames, found {len(rows)} rows")
    frames = np.zeros((frame_count, n_channels))
    for i, row in enumerate(rows):
        vals = row.split()
        if len(vals) != n_channels:
            raise ChannelCountMismatch(
                f"frame {i}: {len(vals)} values, hierarchy has {n_channels} channels")
        try:
            frames[i] = [float(v) for v in vals]
        except ValueError as exc:
            raise MalformedMotion(f"frame {i}: {exc}") from None
    return BvhDocument(root, BvhMotion(frame_time, frames))


def read_bvh(path) -> BvhDocument:
    with open(path, encoding="utf-8") as fh:
        return parse_bvh(fh.read())


# -- serialization ---------------------------------------------------------

def serialize_bvh(doc: BvhDocument) -> str:
    out = ["HIERARCHY"]

    def vec(v):
        return " ".join(fmt(x) for x in v)

    def emit(j: BvhJoint, depth):
        ind = "\t" * depth
        out.append(f"{ind}{'ROOT' if depth == 0 else 'JOINT'} {j.name}")
        out.append(ind + "{")
        out.append(f"{ind}\tOFFSET {vec(j.offset)}")
        if j.channels or depth == 0:
            out.append(f"{ind}\tCHANNELS {len(j.channels)}" + "".join(" " + c for c in j.channels))
        for c in j.children:
            emit(c, depth + 1)
        if j.end_site_offset is not None:
            out.append(f"{ind}\tEnd Site")
            out.append(f"{ind}\t" + "{")
            out.append(f"{ind}\t\tOFFSET {vec(j.end_site_offset)}")
            out.append(f"{ind}\t" + "}")
        out.append(ind + "}")

    emit(doc.root, 0)
    out.append("MOTION")
    out.append(f"Frames: {doc.motion.frame_count}")
    out.append(f"Frame Time: {fmt(doc.motion.frame_time)}")
    for row in doc.motion.frames:
        out.append(" ".join(fmt(v) for v in row))
    return "\n".join(out) + "\n"


def write_bvh(doc: BvhDocument, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_bvh(doc))


# -- forward kinematics ----------------------------------------------------

def axis_rotation(axis: int, degrees):
    """Rotation matrices about a coordinate axis; vectorized over ``degrees``."""
    a = np.radians(np.asarray(degrees, dtype=float))
    c, s = np.cos(a), np.sin(a)
    m = np.zeros(a.shape + (3, 3))
    i, j = [(1, 2), (2, 0), (0, 1)][axis]
    m[..., axis, axis] = 1.0
    m[..., i, i] = c
    m[..., j, j] = c
    m[..., i, j] = -s
    m[..., j, i] = s
    return m


def _fk_batch(doc: BvhDocument, frames: np.ndarray):
    """World positions (F, N, 3) and rotations (F, N, 3, 3) for every node."""
    n_frames = frames.shape[0]
    cols = doc.channel_columns()
    order = _node_order(doc.root)
    index = {name: k for k, (name, _) in enumerate(order)}
    parents = doc.parents()
    pos = np.zeros((n_frames, len(order), 3))
    rot = np.zeros((n_frames, len(order), 3, 3))
    eye = np.broadcast_to(np.eye(3), (n_frames, 3, 3))
    for k, (name, joint) in enumerate(order):
        parent = parents[name]
        if parent is None:
            pr, pp = eye, np.zeros((n_frames, 3))
        else:
            pr, pp = rot[:, index[parent]], pos[:, index[parent]]
        if joint is None:
            offset = np.asarray(doc.joint(parent).end_site_offset, dtype=float)
            rot[:, k] = pr
            pos[:, k] = pp + pr @ offset
            continue
        r = eye
        p = np.broadcast_to(np.asarray(joint.offset, dtype=float), (n_frames, 3))
        values = frames[:, cols[name]]
        for c, ch in enumerate(joint.channels):
            ax = _AXIS[ch[0]]
            if ch.endswith("position"):
                p = p + r[:, :, ax] * values[:, c:c + 1]
            else:
                r = r @ axis_rotation(ax, values[:, c])
        rot[:, k] = pr @ r
        pos[:, k] = pp + np.einsum("fij,fj->fi", pr, p)
    return pos, rot


def world_positions(doc: BvhDocument, frames: slice | None = None) -> np.ndarray:
    """World positions of all joints and end sites: shape (F, N, 3).

    Node order matches :meth:`BvhDocument.node_names`.
    """
    data = doc.motion.frames if frames is None else doc.motion.frames[frames]
    return _fk_batch(doc, data)[0]


def forward_kinematics(doc: BvhDocument, frame_index: int) -> list[JointPose]:
    if not 0 <= frame_index < doc.motion.frame_count:
        raise FrameOutOfRange(f"frame {frame_index} not in [0, {doc.motion.frame_count})")
    pos, rot = _fk_batch(doc, doc.motion.frames[frame_index:frame_index + 1])
    return [JointPose(name, pos[0, k], rot[0, k]) for k, name in enumerate(doc.node_names())]


# -- resampling ------------------------------------------------------------

def _wrap180(d):
    return (np.asarray(d) + 180.0) % 360.0 - 180.0


def resample_motion(doc: BvhDocument, target_fps: float) -> BvhDocument:
    """Resample to ``target_fps``; rotations interpolate along the shortest arc."""
    if not target_fps > 0 or not math.isfinite(target_fps):
        raise InvalidFps(f"target fps must be positive, got {target_fps}")
    motion = doc.motion
    n = motion.frame_count
    if n == 0:
        raise InvalidFps("cannot resample an empty motion")
    count = int(math.floor(motion.duration * target_fps + 1e-9)) + 1
    src = np.arange(count) / target_fps / motion.frame_time
    lo = np.minimum(np.floor(src + 1e-9).astype(int), n - 1)
    hi = np.minimum(lo + 1, n - 1)
    u = np.clip(src - lo, 0.0, 1.0)[:, None]
    u[lo == hi] = 0.0
    a, b = motion.frames[lo], motion.frames[hi]
    delta = b - a
    is_rot = np.array([c.endswith("rotation") for j in doc.root.walk() for c in j.channels],
                      dtype=bool)
    delta[:, is_rot] = _wrap180(delta[:, is_rot])
    frames = a + u * delta
    return replace(doc, motion=BvhMotion(1.0 / target_fps, frames))
