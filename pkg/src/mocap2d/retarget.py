"""Map 3D BVH motion onto a 2D rig as per-bone keyframe timelines.

Every mapped joint is projected onto its assigned plane together with its
direction target (first mapped descendant, else an end site below it).  The
projected world angle is turned into a local bone rotation by undoing the
posed parent chain of the rig, bones processed parents-first.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .bvh import BvhDocument, world_positions
from .errors import (
    DegenerateBone,
    EmptyMotion,
    SchemaViolation,
    SkeletonMismatch,
    UnmappedJoint,
)
from .planes import Plane, PlaneAssignment
from .rig import BonePoseValues, Rig2D, topological_bones

DEFAULT_TOLERANCE = 0.5
DEGENERATE_EPS = 1e-9


class Property(str, enum.Enum):
    ROTATION = "Rotation"
    TRANSLATE_X = "TranslateX"
    TRANSLATE_Y = "TranslateY"


class Interpolation(str, enum.Enum):
    LINEAR = "Linear"
    STEPPED = "Stepped"


@dataclass(frozen=True)
class JointMap:
    entries: dict  # bvh joint -> rig bone, in file order
    scale: float = 1.0
    flip_y: bool = False

    def __post_init__(self):
        if not self.scale > 0:
            raise SchemaViolation("scale", f"scale must be > 0, got {self.scale}")
        targets = list(self.entries.values())
        if len(set(targets)) != len(targets):
            dup = sorted({t for t in targets if targets.count(t) > 1})
            raise SchemaViolation("entries", f"mapping is not injective: {', '.join(dup)}")


def parse_joint_map(text: str) -> JointMap:
    """Read ``bvh_joint = rig_bone`` lines plus ``scale``/``flip_y`` directives."""
    entries: dict[str, str] = {}
    scale, flip_y = 1.0, False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key or not value:
            raise SchemaViolation(f"line {lineno}", f"expected 'key = value', got {raw!r}")
        if key == "scale":
            try:
                scale = float(value)
            except ValueError:
                raise SchemaViolation(f"line {lineno}", f"bad scale {value!r}") from None
        elif key == "flip_y":
            if value.lower() not in ("true", "false"):
                raise SchemaViolation(f"line {lineno}", f"flip_y must be true or false, got {value!r}")
            flip_y = value.lower() == "true"
        else:
            if key in entries:
                raise SchemaViolation(f"line {lineno}", f"joint {key!r} mapped twice")
            entries[key] = value
    return JointMap(entries, scale, flip_y)


def load_joint_map(path) -> JointMap:
    with open(path, encoding="utf-8") as fh:
        return parse_joint_map(fh.read())


@dataclass(frozen=True)
class Timeline:
    bone: str
    property: Property
    times: np.ndarray
    values: np.ndarray
    interpolation: Interpolation = Interpolation.LINEAR

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError(f"{self.bone}/{self.property}: times and values must be equal-length 1-D")
        if t.size and (np.any(np.diff(t) <= 0) or t[0] < 0):
            raise ValueError(f"{self.bone}/{self.property}: key times must be >= 0 and strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "property", Property(self.property))
        object.__setattr__(self, "interpolation", Interpolation(self.interpolation))

    def __len__(self):
        return int(self.times.size)

    def sample(self, time: float) -> float:
        t, v = self.times, self.values
        if self.interpolation == Interpolation.STEPPED:
            k = int(np.searchsorted(t, time, side="right")) - 1
            return float(v[max(k, 0)])
        return float(np.interp(time, t, v))


@dataclass(frozen=True)
class AnimationClip:
    name: str
    skeleton_id: str
    duration: float
    fps: float
    timelines: tuple = field(default_factory=tuple)

    def timeline(self, bone, prop) -> Timeline | None:
        prop = Property(prop)
        for tl in self.timelines:
            if tl.bone == bone and tl.property == prop:
                return tl
        return None


# -- geometry primitives ---------------------------------------------------

def project_joint(position, plane: Plane, flip_y: bool = False) -> np.ndarray:
    """Drop the off-plane coordinate: frontal gives (x, y), side gives (z, y)."""
    p = np.asarray(position, dtype=float)
    first = p[..., 0] if Plane(plane) == Plane.FRONTAL else p[..., 2]
    y = -p[..., 1] if flip_y else p[..., 1]
    return np.stack([first, y], axis=-1)


def bone_angle_2d(parent_pt, child_pt) -> float:
    """Counterclockwise angle of ``child - parent`` from +X in (-180, 180]."""
    d = np.asarray(child_pt, dtype=float) - np.asarray(parent_pt, dtype=float)
    if math.hypot(d[0], d[1]) <= DEGENERATE_EPS:
        raise DegenerateBone(f"coincident points {tuple(parent_pt)}")
    a = math.degrees(math.atan2(d[1], d[0]))
    return 180.0 if a == -180.0 else a


def unwrap_angles(series) -> np.ndarray:
    """Shift samples by multiples of 360 so consecutive steps stay within 180."""
    a = np.asarray(series, dtype=float)
    if a.size < 2:
        return a.copy()
    d = np.diff(a)
    turns = -np.round(d / 360.0)
    return a + 360.0 * np.concatenate([[0.0], np.cumsum(turns)])


# -- extraction ------------------------------------------------------------

def _direction_targets(doc: BvhDocument, jmap: JointMap) -> dict[str, str]:
    order = list(jmap.entries)
    out = {}
    for name in order:
        joint = doc.joint(name)
        found: list[str] = []

        def visit(j):
            if j.name in jmap.entries:
                found.append(j.name)
                return
            for c in j.children:
                visit(c)

        for c in joint.children:
            visit(c)
        if found:
            out[name] = min(found, key=order.index)
        else:
            out[name] = next(j.end_site_name for j in joint.walk() if j.end_site_offset is not None)
    return out


def _forward_fill(values: np.ndarray, first: float) -> np.ndarray:
    """Replace NaNs by the previous valid value (``first`` before any)."""
    bad = np.isnan(values)
    if not bad.any():
        return values
    out = values.copy()
    prev = first
    for i in range(out.size):
        if bad[i]:
            out[i] = prev
        else:
            prev = out[i]
    return out


def extract_clip(doc: BvhDocument, assignments, jmap: JointMap, rig: Rig2D, name: str) -> AnimationClip:
    """Retarget a BVH document onto ``rig`` and return one key per frame."""
    n_frames = doc.motion.frame_count
    if n_frames == 0:
        raise EmptyMotion("BVH document has no frames")
    joint_names = {j.name for j in doc.root.walk()}
    missing = [j for j in jmap.entries if j not in joint_names]
    if missing:
        raise UnmappedJoint(f"joint map references unknown BVH joint(s): {', '.join(missing)}")
    bone_names = set(rig.bone_names())
    absent = [b for b in jmap.entries.values() if b not in bone_names]
    if absent:
        raise SkeletonMismatch(f"joint map targets bones missing from {rig.skeleton_id!r}: {', '.join(absent)}")

    planes = {a.joint_name: Plane(a.plane) for a in (assignments or [])}
    pos = world_positions(doc)
    index = {n: k for k, n in enumerate(doc.node_names())}
    targets = _direction_targets(doc, jmap)

    # world-space direction per mapped bone, NaN where degenerate
    world_dir: dict[str, np.ndarray] = {}
    for joint, bone in jmap.entries.items():
        plane = planes.get(joint, Plane.FRONTAL)
        a = project_joint(pos[:, index[joint]], plane, jmap.flip_y)
        b = project_joint(pos[:, index[targets[joint]]], plane, jmap.flip_y)
        d = b - a
        norm = np.hypot(d[:, 0], d[:, 1])
        d = d / np.where(norm > DEGENERATE_EPS, norm, np.nan)[:, None]
        world_dir[bone] = d

    root_joint = next(n for n in doc.node_names() if n in jmap.entries)
    root_bone = jmap.entries[root_joint]
    root_xy = project_joint(pos[:, index[root_joint]], planes.get(root_joint, Plane.FRONTAL),
                            jmap.flip_y) * jmap.scale

    rotation: dict[str, np.ndarray] = {}
    world: dict[str, np.ndarray] = {}
    eye = np.broadcast_to(np.eye(3), (n_frames, 3, 3))
    for bone in topological_bones(rig):
        parent_w = eye if bone.parent is None else world[bone.parent]
        d_rot = np.zeros(n_frames)
        if bone.name in world_dir:
            lin = parent_w[:, :2, :2]
            local = np.linalg.solve(lin, world_dir[bone.name][..., None])[..., 0]
            phi = np.degrees(np.arctan2(local[:, 1], local[:, 0]))
            if bone.rest_scale[0] < 0:
                phi = phi + 180.0
            d_rot = (phi - bone.rest_rotation + 180.0) % 360.0 - 180.0
            d_rot = _forward_fill(d_rot, 0.0)
            rotation[bone.name] = d_rot
        trans = root_xy if bone.name == root_bone else np.zeros((n_frames, 2))
        a = np.radians(bone.rest_rotation + d_rot)
        c, s = np.cos(a), np.sin(a)
        sx, sy = bone.rest_scale
        m = np.zeros((n_frames, 3, 3))
        m[:, 0, 0], m[:, 0, 1] = c * sx, -s * sy
        m[:, 1, 0], m[:, 1, 1] = s * sx, c * sy
        m[:, 0, 2] = bone.rest_translation[0] + trans[:, 0]
        m[:, 1, 2] = bone.rest_translation[1] + trans[:, 1]
        m[:, 2, 2] = 1.0
        world[bone.name] = parent_w @ m

    times = np.arange(n_frames) * doc.motion.frame_time
    timelines = []
    for bone in rig.bones:
        if bone.name in rotation:
            timelines.append(Timeline(bone.name, Property.ROTATION, times, unwrap_angles(rotation[bone.name])))
        if bone.name == root_bone:
            timelines.append(Timeline(bone.name, Property.TRANSLATE_X, times, root_xy[:, 0].copy()))
            timelines.append(Timeline(bone.name, Property.TRANSLATE_Y, times, root_xy[:, 1].copy()))
    return AnimationClip(name, rig.skeleton_id, (n_frames - 1) * doc.motion.frame_time,
                         1.0 / doc.motion.frame_time, tuple(timelines))


# -- decimation ------------------------------------------------------------

def _keep_mask(times, values, tolerance, stepped):
    n = times.size
    keep = np.zeros(n, dtype=bool)
    if n == 0:
        return keep
    keep[0] = keep[-1] = True
    if n <= 2 or tolerance <= 0:
        keep[:] = True
        return keep
    limit = tolerance - 1e-12
    v = values.reshape(n, -1)
    anchor = 0
    if stepped:
        for i in range(1, n - 1):
            if np.abs(v[i] - v[anchor]).max() > limit:
                keep[i] = True
                anchor = i
        return keep
    i = 2
    while i < n:
        seg = slice(anchor + 1, i)
        u = ((times[seg] - times[anchor]) / (times[i] - times[anchor]))[:, None]
        interp = v[anchor] + u * (v[i] - v[anchor])
        if np.abs(interp - v[seg]).max() <= limit:
            i += 1
            continue
        anchor = i - 1
        keep[anchor] = True
        i = anchor + 2
    return keep


def decimate_keyframes(timeline: Timeline, tolerance: float = DEFAULT_TOLERANCE) -> Timeline:
    """Drop keys that interpolation of the surviving neighbours reproduces.

    The replay error at every original key time stays within ``tolerance``.
    Tolerance 0 keeps every key.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    keep = _keep_mask(timeline.times, timeline.values, tolerance,
                      timeline.interpolation == Interpolation.STEPPED)
    return Timeline(timeline.bone, timeline.property, timeline.times[keep], timeline.values[keep],
                    timeline.interpolation)


def decimate_clip(clip: AnimationClip, rotation_tolerance: float = DEFAULT_TOLERANCE,
                  translation_tolerance: float | None = None) -> AnimationClip:
    """Decimate every timeline; a bone's X/Y translate pair is decimated jointly
    so both keep identical key times."""
    if translation_tolerance is None:
        translation_tolerance = rotation_tolerance
    out = []
    done = set()
    for tl in clip.timelines:
        if (tl.bone, tl.property) in done:
            continue
        if tl.property == Property.ROTATION:
            out.append(decimate_keyframes(tl, rotation_tolerance))
            continue
        other_prop = Property.TRANSLATE_Y if tl.property == Property.TRANSLATE_X else Property.TRANSLATE_X
        other = clip.timeline(tl.bone, other_prop)
        if (other is not None and np.array_equal(other.times, tl.times)
                and other.interpolation == tl.interpolation):
            keep = _keep_mask(tl.times, np.stack([tl.values, other.values], axis=1),
                              translation_tolerance, tl.interpolation == Interpolation.STEPPED)
            for t in (tl, other):
                done.add((t.bone, t.property))
            pair = [Timeline(t.bone, t.property, t.times[keep], t.values[keep], t.interpolation)
                    for t in (tl, other)]
            out.extend(sorted(pair, key=lambda t: t.property != Property.TRANSLATE_X))
        else:
            out.append(decimate_keyframes(tl, translation_tolerance))
    return AnimationClip(clip.name, clip.skeleton_id, clip.duration, clip.fps, tuple(out))


# -- sampling --------------------------------------------------------------

def sample_clip(clip: AnimationClip, time: float, loop: bool = False) -> BonePoseValues:
    """Pose offsets at ``time``; past the end the clip clamps or, with ``loop``, wraps."""
    if time < 0:
        raise ValueError("time must be >= 0")
    if clip.duration <= 0:
        t = 0.0
    elif loop:
        t = math.fmod(time, clip.duration)
    else:
        t = min(time, clip.duration)
    pose = BonePoseValues()
    for tl in clip.timelines:
        if len(tl) == 0:
            continue
        v = tl.sample(t)
        if tl.property == Property.ROTATION:
            pose.rotation[tl.bone] = v
        else:
            x, y = pose.translation.get(tl.bone, (0.0, 0.0))
            pose.translation[tl.bone] = (v, y) if tl.property == Property.TRANSLATE_X else (x, v)
    return pose


def check_clip_for_rig(clip: AnimationClip, rig: Rig2D):
    if clip.skeleton_id != rig.skeleton_id:
        raise SkeletonMismatch(f"clip {clip.name!r} targets {clip.skeleton_id!r}, rig is {rig.skeleton_id!r}")
    names = set(rig.bone_names())
    stray = sorted({tl.bone for tl in clip.timelines} - names)
    if stray:
        raise SkeletonMismatch(f"clip {clip.name!r} animates unknown bones: {', '.join(stray)}")
