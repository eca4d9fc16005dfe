"""Layered 2D character rigs: bones, slots, weighted mesh attachments, skins.

Bone transforms compose as translate, then rotate, then scale.  A bone points
along its local +X axis.  All characters sharing a ``skeleton_id`` share the
same bone list, so any clip drives all of them identically.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidRig, SkeletonMismatch, UnknownAttachment, UnknownBoneInPose, UnknownSkin

WEIGHT_TOL = 1e-6
DEFAULT_SKIN = "default"


@dataclass(frozen=True)
class Bone2D:
    name: str
    parent: str | None = None
    length: float = 0.0
    rest_rotation: float = 0.0
    rest_translation: tuple[float, float] = (0.0, 0.0)
    rest_scale: tuple[float, float] = (1.0, 1.0)


@dataclass(frozen=True)
class Slot:
    name: str
    bone: str
    draw_order_index: int
    active_attachment: str | None = None


@dataclass(frozen=True)
class MeshAttachment:
    name: str
    vertices: tuple[tuple[float, float], ...]
    triangles: tuple[tuple[int, int, int], ...]
    uvs: tuple[tuple[float, float], ...]
    weights: tuple[tuple[tuple[str, float], ...], ...]
    texture_ref: str = ""


@dataclass(frozen=True)
class Skin:
    name: str
    entries: dict = field(default_factory=dict)  # slot name -> attachment name

    def __hash__(self):
        return hash((self.name, tuple(sorted(self.entries.items()))))


@dataclass(frozen=True)
class Rig2D:
    skeleton_id: str
    bones: tuple[Bone2D, ...]
    slots: tuple[Slot, ...] = ()
    attachments: tuple[MeshAttachment, ...] = ()
    skins: tuple[Skin, ...] = (Skin(DEFAULT_SKIN),)
    textures: dict = field(default_factory=dict)  # texture name -> image path

    def bone(self, name) -> Bone2D:
        for b in self.bones:
            if b.name == name:
                return b
        raise KeyError(name)

    def attachment(self, name) -> MeshAttachment:
        for a in self.attachments:
            if a.name == name:
                return a
        raise UnknownAttachment(name)

    def skin(self, name) -> Skin:
        for s in self.skins:
            if s.name == name:
                return s
        raise UnknownSkin(name)

    def bone_names(self):
        return [b.name for b in self.bones]

    def slots_in_draw_order(self):
        return sorted(self.slots, key=lambda s: s.draw_order_index)


@dataclass
class BonePoseValues:
    """Offsets from the rest pose; bones not listed stay at rest."""
    rotation: dict = field(default_factory=dict)  # bone -> degrees
    translation: dict = field(default_factory=dict)  # bone -> (dx, dy)

    def bones(self):
        return set(self.rotation) | set(self.translation)


@dataclass(frozen=True)
class Issue:
    code: str
    path: str
    message: str = ""


# -- validation ------------------------------------------------------------

def validate_rig(rig: Rig2D) -> list[Issue]:
    """Every violated rig invariant, with a JSON-pointer-style path."""
    issues: list[Issue] = []
    add = lambda code, path, msg="": issues.append(Issue(code, path, msg))  # noqa: E731

    names: dict[str, int] = {}
    for i, b in enumerate(rig.bones):
        if b.name in names:
            add("DuplicateBoneName", f"/bones/{i}/name", b.name)
        names.setdefault(b.name, i)
        if b.length < 0:
            add("NegativeLength", f"/bones/{i}/length", str(b.length))
    roots = [i for i, b in enumerate(rig.bones) if b.parent is None]
    if not roots:
        add("NoRoot", "/bones")
    elif len(roots) > 1:
        add("MultipleRoots", "/bones", ", ".join(rig.bones[i].name for i in roots))
    for i, b in enumerate(rig.bones):
        if b.parent is not None and b.parent not in names:
            add("UnknownParent", f"/bones/{i}/parent", str(b.parent))
    parent_of = {b.name: b.parent for b in rig.bones}
    for i, b in enumerate(rig.bones):
        seen, cur = set(), b.name
        while cur is not None and cur in parent_of:
            if cur in seen:
                add("Cycle", f"/bones/{i}", b.name)
                break
            seen.add(cur)
            cur = parent_of[cur]

    att_names: dict[str, int] = {}
    for i, a in enumerate(rig.attachments):
        base = f"/attachments/{i}"
        if a.name in att_names:
            add("DuplicateAttachmentName", f"{base}/name", a.name)
        att_names.setdefault(a.name, i)
        n = len(a.vertices)
        if len(a.uvs) != n:
            add("UVCountMismatch", f"{base}/uvs", f"{len(a.uvs)} uvs for {n} vertices")
        for k, uv in enumerate(a.uvs):
            if not all(0.0 <= c <= 1.0 for c in uv):
                add("UVOutOfRange", f"{base}/uvs/{k}")
        for k, tri in enumerate(a.triangles):
            if len(tri) != 3 or not all(0 <= t < n for t in tri):
                add("TriangleIndexOutOfRange", f"{base}/triangles/{k}", str(tri))
        if len(a.weights) != n:
            add("WeightCountMismatch", f"{base}/weights", f"{len(a.weights)} weight lists for {n} vertices")
        for k, ws in enumerate(a.weights):
            if not ws:
                add("EmptyWeights", f"{base}/weights/{k}")
                continue
            for m, (bone, w) in enumerate(ws):
                if bone not in names:
                    add("UnknownWeightBone", f"{base}/weights/{k}/{m}", bone)
                if w < 0:
                    add("NegativeWeight", f"{base}/weights/{k}/{m}", str(w))
            total = sum(w for _, w in ws)
            if abs(total - 1.0) > WEIGHT_TOL:
                add("WeightSumViolation", f"{base}/weights/{k}", f"vertex {k} weights sum to {total:.6g}")

    slot_names: dict[str, int] = {}
    for i, s in enumerate(rig.slots):
        if s.name in slot_names:
            add("DuplicateSlotName", f"/slots/{i}/name", s.name)
        slot_names.setdefault(s.name, i)
        if s.bone not in names:
            add("UnknownSlotBone", f"/slots/{i}/bone", s.bone)
        if s.active_attachment is not None and s.active_attachment not in att_names:
            add("UnknownAttachment", f"/slots/{i}/active_attachment", s.active_attachment)
    if sorted(s.draw_order_index for s in rig.slots) != list(range(len(rig.slots))):
        add("DrawOrderNotPermutation", "/slots")

    skin_names = set()
    for i, sk in enumerate(rig.skins):
        if sk.name in skin_names:
            add("DuplicateSkinName", f"/skins/{i}/name", sk.name)
        skin_names.add(sk.name)
        for slot, att in sk.entries.items():
            if slot not in slot_names:
                add("UnknownSlot", f"/skins/{i}/entries/{slot}", slot)
            if att not in att_names:
                add("UnknownAttachment", f"/skins/{i}/entries/{slot}", att)
    if DEFAULT_SKIN not in skin_names:
        add("MissingDefaultSkin", "/skins")
    return issues


def require_valid(rig: Rig2D):
    report = validate_rig(rig)
    if report:
        raise InvalidRig(report)


def same_skeleton(a: Rig2D, b: Rig2D) -> bool:
    return a.skeleton_id == b.skeleton_id and tuple(a.bones) == tuple(b.bones)


def check_same_skeleton(a: Rig2D, b: Rig2D):
    """Rigs claiming one ``skeleton_id`` must carry identical bone lists."""
    if a.skeleton_id == b.skeleton_id and tuple(a.bones) != tuple(b.bones):
        raise SkeletonMismatch(f"rigs share skeleton_id {a.skeleton_id!r} but differ in bones")


# -- pose evaluation -------------------------------------------------------

def local_matrix(bone: Bone2D, d_rot=0.0, d_trans=(0.0, 0.0)) -> np.ndarray:
    tx = bone.rest_translation[0] + d_trans[0]
    ty = bone.rest_translation[1] + d_trans[1]
    a = np.radians(bone.rest_rotation + d_rot)
    c, s = np.cos(a), np.sin(a)
    sx, sy = bone.rest_scale
    return np.array([[c * sx, -s * sy, tx],
                     [s * sx, c * sy, ty],
                     [0.0, 0.0, 1.0]])


def topological_bones(rig: Rig2D) -> list[Bone2D]:
    """Bones ordered parents-first, keeping declaration order where possible."""
    placed: set[str] = set()
    out: list[Bone2D] = []
    pending = list(rig.bones)
    while pending:
        rest = [b for b in pending if not (b.parent is None or b.parent in placed)]
        ready = [b for b in pending if b.parent is None or b.parent in placed]
        if not ready:
            raise InvalidRig([Issue("Cycle", "/bones")])
        for b in ready:
            out.append(b)
            placed.add(b.name)
        pending = rest
    return out


def world_transforms(rig: Rig2D, pose: BonePoseValues | None = None) -> dict[str, np.ndarray]:
    """3x3 affine world matrix of every bone under ``pose``."""
    pose = pose or BonePoseValues()
    names = {b.name for b in rig.bones}
    unknown = pose.bones() - names
    if unknown:
        raise UnknownBoneInPose(", ".join(sorted(unknown)))
    world: dict[str, np.ndarray] = {}
    for b in topological_bones(rig):
        m = local_matrix(b, pose.rotation.get(b.name, 0.0), pose.translation.get(b.name, (0.0, 0.0)))
        world[b.name] = m if b.parent is None else world[b.parent] @ m
    return {b.name: world[b.name] for b in rig.bones}


def skin_vertices(rig: Rig2D, pose: BonePoseValues | None, attachment: str) -> np.ndarray:
    """Linear blend skinning of one attachment; returns (V, 2) deformed vertices."""
    att = rig.attachment(attachment)
    posed = world_transforms(rig, pose)
    rest = world_transforms(rig)
    bones = sorted({b for ws in att.weights for b, _ in ws})
    skinning = {b: posed[b] @ np.linalg.inv(rest[b]) for b in bones}
    verts = np.asarray(att.vertices, dtype=float).reshape(-1, 2)
    out = np.zeros_like(verts)
    for k, ws in enumerate(att.weights):
        v = np.array([verts[k, 0], verts[k, 1], 1.0])
        acc = np.zeros(3)
        for b, w in ws:
            acc += w * (skinning[b] @ v)
        out[k] = acc[:2]
    return out


def attach_skin(rig: Rig2D, skin_name: str) -> Rig2D:
    """Activate a skin; slots it omits fall back to the default skin."""
    skin = rig.skin(skin_name)
    default = rig.skin(DEFAULT_SKIN) if any(s.name == DEFAULT_SKIN for s in rig.skins) else Skin(DEFAULT_SKIN)
    slots = []
    for s in rig.slots:
        if s.name in skin.entries:
            att = skin.entries[s.name]
        else:
            att = default.entries.get(s.name, s.active_attachment)
        slots.append(replace(s, active_attachment=att))
    return replace(rig, slots=tuple(slots))


def normalize_weights(weights, low=0.9, high=1.1):
    """Renormalize per-vertex weights whose sums lie in [low, high].

    Returns ``(weights, bad_vertex_indices)``; vertices outside the band are
    left untouched and reported.
    """
    out, bad = [], []
    for k, ws in enumerate(weights):
        total = sum(w for _, w in ws)
        if ws and low <= total <= high and all(w >= 0 for _, w in ws):
            out.append(tuple((b, w / total) for b, w in ws))
        else:
            out.append(tuple(ws))
            bad.append(k)
    return tuple(out), bad
