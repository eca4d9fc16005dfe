"""File formats: native rig and clip JSON, a Spine 3.8 JSON subset, and
segmentation manifests for layered characters.

Native rig JSON::

    {"skeleton_id": str,
     "bones": [{"name", "parent", "length", "rest_rotation",
                "rest_translation": [x, y], "rest_scale": [sx, sy]}],
     "slots": [{"name", "bone", "draw_order", "attachment"}],
     "attachments": [{"name", "texture", "vertices": [[x, y]], "uvs": [[u, v]],
                      "triangles": [[i, j, k]], "weights": [[[bone, w], ...]]}],
     "skins": [{"name", "entries": {slot: attachment}}],
     "textures": {name: png_path}}
"""
from __future__ import annotations

import base64
import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._numfmt import num
from .errors import (
    DuplicateLabel,
    InvalidReference,
    MissingImage,
    SchemaViolation,
    SkeletonMismatch,
    UnsupportedFeature,
)
from .retarget import AnimationClip, Interpolation, Property, Timeline
from .rig import (
    DEFAULT_SKIN,
    Bone2D,
    MeshAttachment,
    Rig2D,
    Skin,
    Slot,
    normalize_weights,
    validate_rig,
    world_transforms,
)

SPINE_VERSION = "3.8"

_REFERENCE_CODES = {"UnknownParent", "UnknownSlotBone", "UnknownAttachment", "UnknownSlot",
                    "UnknownWeightBone"}


# -- small schema helpers --------------------------------------------------

def _loads(data, what):
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaViolation("/", f"{what} is not UTF-8: {exc}") from None
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("/", f"{what} is not valid JSON: {exc}") from None


def _dumps(obj) -> bytes:
    return (json.dumps(obj, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _get(obj, key, path, kind, default=...):
    if not isinstance(obj, dict):
        raise SchemaViolation(path, "expected an object")
    if key not in obj:
        if default is ...:
            raise SchemaViolation(f"{path}/{key}", "required key missing")
        return default
    value = obj[key]
    if kind is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif kind is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, kind)
    if not ok:
        raise SchemaViolation(f"{path}/{key}", f"expected {getattr(kind, '__name__', kind)}")
    return value


def _vec(value, n, path, kind=float):
    if not isinstance(value, list) or len(value) != n:
        raise SchemaViolation(path, f"expected a list of {n} numbers")
    for k, x in enumerate(value):
        if isinstance(x, bool) or not isinstance(x, (int,) if kind is int else (int, float)):
            raise SchemaViolation(f"{path}/{k}", "expected a number")
    return tuple(kind(x) for x in value)


def _list(obj, key, path, default=...):
    return _get(obj, key, path, list, default)


def _raise_report(report):
    first = report[0]
    cls = InvalidReference if first.code in _REFERENCE_CODES else SchemaViolation
    raise cls(first.path, f"{first.code}: {first.message}".rstrip(": "), report)


# -- native rig ------------------------------------------------------------

def rig_to_dict(rig: Rig2D) -> dict:
    return {
        "skeleton_id": rig.skeleton_id,
        "bones": [{
            "name": b.name,
            "parent": b.parent,
            "length": num(b.length),
            "rest_rotation": num(b.rest_rotation),
            "rest_translation": [num(x) for x in b.rest_translation],
            "rest_scale": [num(x) for x in b.rest_scale],
        } for b in rig.bones],
        "slots": [{
            "name": s.name,
            "bone": s.bone,
            "draw_order": s.draw_order_index,
            "attachment": s.active_attachment,
        } for s in rig.slots],
        "attachments": [{
            "name": a.name,
            "texture": a.texture_ref,
            "vertices": [[num(x), num(y)] for x, y in a.vertices],
            "uvs": [[num(u), num(v)] for u, v in a.uvs],
            "triangles": [list(t) for t in a.triangles],
            "weights": [[[b, num(w)] for b, w in ws] for ws in a.weights],
        } for a in rig.attachments],
        "skins": [{"name": s.name, "entries": dict(s.entries)} for s in rig.skins],
        "textures": dict(rig.textures),
    }


def rig_from_dict(d, strict: bool = True) -> Rig2D:
    """Build a rig from its native dict form.

    ``strict`` raises on any invariant violation; otherwise the rig is
    returned as-is so :func:`validate_rig` can report on it.
    """
    if not isinstance(d, dict):
        raise SchemaViolation("/", "rig document must be an object")
    skeleton_id = _get(d, "skeleton_id", "", str)
    bones = []
    for i, b in enumerate(_list(d, "bones", "")):
        p = f"/bones/{i}"
        parent = _get(b, "parent", p, (str, type(None)), None)
        bones.append(Bone2D(
            name=_get(b, "name", p, str),
            parent=parent,
            length=float(_get(b, "length", p, float, 0.0)),
            rest_rotation=float(_get(b, "rest_rotation", p, float, 0.0)),
            rest_translation=_vec(b.get("rest_translation", [0, 0]), 2, f"{p}/rest_translation"),
            rest_scale=_vec(b.get("rest_scale", [1, 1]), 2, f"{p}/rest_scale"),
        ))
    slots = []
    for i, s in enumerate(_list(d, "slots", "", [])):
        p = f"/slots/{i}"
        slots.append(Slot(
            name=_get(s, "name", p, str),
            bone=_get(s, "bone", p, str),
            draw_order_index=_get(s, "draw_order", p, int, i),
            active_attachment=_get(s, "attachment", p, (str, type(None)), None),
        ))
    attachments = []
    for i, a in enumerate(_list(d, "attachments", "", [])):
        p = f"/attachments/{i}"
        verts = tuple(_vec(v, 2, f"{p}/vertices/{k}") for k, v in enumerate(_list(a, "vertices", p)))
        uvs = tuple(_vec(v, 2, f"{p}/uvs/{k}") for k, v in enumerate(_list(a, "uvs", p)))
        tris = tuple(_vec(t, 3, f"{p}/triangles/{k}", int) for k, t in enumerate(_list(a, "triangles", p)))
        weights = []
        for k, ws in enumerate(_list(a, "weights", p)):
            if not isinstance(ws, list):
                raise SchemaViolation(f"{p}/weights/{k}", "expected a list of [bone, weight] pairs")
            pairs = []
            for m, pair in enumerate(ws):
                if (not isinstance(pair, list) or len(pair) != 2 or not isinstance(pair[0], str)
                        or isinstance(pair[1], bool) or not isinstance(pair[1], (int, float))):
                    raise SchemaViolation(f"{p}/weights/{k}/{m}", "expected [bone, weight]")
                pairs.append((pair[0], float(pair[1])))
            weights.append(tuple(pairs))
        weights, bad = normalize_weights(weights)
        if bad and strict:
            k = bad[0]
            total = sum(w for _, w in weights[k])
            raise SchemaViolation(f"{p}/weights/{k}",
                                  f"WeightSumViolation: vertex {k} weights sum to {total:.6g}")
        attachments.append(MeshAttachment(
            name=_get(a, "name", p, str),
            vertices=verts, triangles=tris, uvs=uvs, weights=weights,
            texture_ref=_get(a, "texture", p, str, ""),
        ))
    skins = []
    for i, s in enumerate(_list(d, "skins", "", [])):
        p = f"/skins/{i}"
        entries = _get(s, "entries", p, dict, {})
        for slot, att in entries.items():
            if not isinstance(att, str):
                raise SchemaViolation(f"{p}/entries/{slot}", "expected an attachment name")
        skins.append(Skin(_get(s, "name", p, str), dict(entries)))
    textures = _get(d, "textures", "", dict, {})
    rig = Rig2D(skeleton_id, tuple(bones), tuple(slots), tuple(attachments), tuple(skins),
                {str(k): str(v) for k, v in textures.items()})
    report = validate_rig(rig) if strict else []
    if report:
        _raise_report(report)
    return rig


def save_rig(rig: Rig2D) -> bytes:
    return _dumps(rig_to_dict(rig))


def load_rig(data, strict: bool = True) -> Rig2D:
    return rig_from_dict(_loads(data, "rig"), strict)


def read_rig(path, strict: bool = True) -> Rig2D:
    return load_rig(Path(path).read_bytes(), strict)


def write_rig(rig: Rig2D, path):
    Path(path).write_bytes(save_rig(rig))


# -- native clip -----------------------------------------------------------

def clip_to_dict(clip: AnimationClip) -> dict:
    return {
        "name": clip.name,
        "skeleton_id": clip.skeleton_id,
        "duration": num(clip.duration),
        "fps": num(clip.fps),
        "timelines": [{
            "bone": tl.bone,
            "property": tl.property.value,
            "interpolation": tl.interpolation.value,
            "keys": [[num(t), num(v)] for t, v in zip(tl.times, tl.values)],
        } for tl in clip.timelines],
    }


def clip_from_dict(d) -> AnimationClip:
    timelines = []
    for i, t in enumerate(_list(d, "timelines", "", [])):
        p = f"/timelines/{i}"
        keys = _list(t, "keys", p)
        pairs = [_vec(k, 2, f"{p}/keys/{n}") for n, k in enumerate(keys)]
        try:
            timelines.append(Timeline(
                _get(t, "bone", p, str),
                Property(_get(t, "property", p, str)),
                np.array([k[0] for k in pairs]), np.array([k[1] for k in pairs]),
                Interpolation(_get(t, "interpolation", p, str, "Linear")),
            ))
        except ValueError as exc:
            raise SchemaViolation(p, str(exc)) from None
    return AnimationClip(
        _get(d, "name", "", str), _get(d, "skeleton_id", "", str),
        float(_get(d, "duration", "", float)), float(_get(d, "fps", "", float)), tuple(timelines))


def save_clip(clip: AnimationClip) -> bytes:
    return _dumps(clip_to_dict(clip))


def load_clip(data) -> AnimationClip:
    return clip_from_dict(_loads(data, "clip"))


def read_clip(path) -> AnimationClip:
    return load_clip(Path(path).read_bytes())


def write_clip(clip: AnimationClip, path):
    Path(path).write_bytes(save_clip(clip))


# -- Spine 3.8 subset ------------------------------------------------------

@dataclass(frozen=True)
class SpineExportDocument:
    text: bytes
    skeleton: dict
    bones: list
    slots: list
    skins: list
    animations: dict

    @classmethod
    def from_bytes(cls, data: bytes) -> "SpineExportDocument":
        d = _loads(data, "Spine document")
        return cls(bytes(data), d.get("skeleton", {}), d.get("bones", []), d.get("slots", []),
                   d.get("skins", []), d.get("animations", {}))


def _content_hash(doc: dict) -> str:
    digest = hashlib.sha1(_dumps(doc)).digest()
    return base64.b64encode(digest[:8]).decode("ascii").rstrip("=")


def _merged_translate(clip, bone):
    tx = clip.timeline(bone, Property.TRANSLATE_X)
    ty = clip.timeline(bone, Property.TRANSLATE_Y)
    if tx is None and ty is None:
        return None
    present = [t for t in (tx, ty) if t is not None]
    if len({t.interpolation for t in present}) > 1:
        raise UnsupportedFeature("mixed translate interpolation", f"/animations/{clip.name}/bones/{bone}/translate")
    times = np.unique(np.concatenate([t.times for t in present]))
    xs = np.array([tx.sample(t) for t in times]) if tx is not None else np.zeros(times.size)
    ys = np.array([ty.sample(t) for t in times]) if ty is not None else np.zeros(times.size)
    if tx is not None and np.array_equal(tx.times, times):
        xs = tx.values
    if ty is not None and np.array_equal(ty.times, times):
        ys = ty.values
    return times, xs, ys, present[0].interpolation


def _key(time, interpolation, **values):
    k = {"time": num(time)}
    k.update({name: num(v) for name, v in values.items()})
    if interpolation == Interpolation.STEPPED:
        k["curve"] = "stepped"
    return k


def export_spine_json(rig: Rig2D, clips=()) -> bytes:
    """Serialize a rig and its clips as Spine 3.8 JSON (the supported subset)."""
    for clip in clips:
        if clip.skeleton_id != rig.skeleton_id:
            raise SkeletonMismatch(f"clip {clip.name!r} targets {clip.skeleton_id!r}, rig is {rig.skeleton_id!r}")
        stray = sorted({tl.bone for tl in clip.timelines} - set(rig.bone_names()))
        if stray:
            raise SkeletonMismatch(f"clip {clip.name!r} animates unknown bones: {', '.join(stray)}")
    report = validate_rig(rig)
    if report:
        _raise_report(report)

    names = [b.name for b in rig.bones]
    placed = set()
    for b in rig.bones:
        if b.parent is not None and b.parent not in placed:
            raise UnsupportedFeature("bone listed before its parent", f"/bones/{names.index(b.name)}")
        placed.add(b.name)
    bone_index = {n: i for i, n in enumerate(names)}
    rest = world_transforms(rig)
    rest_inv = {n: np.linalg.inv(m) for n, m in rest.items()}

    skinned = {a for s in rig.skins for a in s.entries.values()}
    for i, a in enumerate(rig.attachments):
        if a.name not in skinned:
            raise UnsupportedFeature("attachment outside every skin", f"/attachments/{i}")

    all_verts = [v for a in rig.attachments for v in a.vertices]
    if all_verts:
        arr = np.asarray(all_verts, dtype=float)
        lo, hi = arr.min(axis=0), arr.max(axis=0)
    else:
        lo = hi = np.zeros(2)

    header = {
        "hash": "",
        "spine": SPINE_VERSION,
        "x": num(lo[0]), "y": num(lo[1]),
        "width": num(hi[0] - lo[0]), "height": num(hi[1] - lo[1]),
        "images": "./",
        "skeletonId": rig.skeleton_id,
        "textures": dict(rig.textures),
        "clipInfo": {c.name: {"duration": num(c.duration), "fps": num(c.fps)} for c in clips},
    }

    bones = []
    for b in rig.bones:
        e = {"name": b.name}
        if b.parent is not None:
            e["parent"] = b.parent
        for key, value, default in (("length", b.length, 0), ("rotation", b.rest_rotation, 0),
                                    ("x", b.rest_translation[0], 0), ("y", b.rest_translation[1], 0),
                                    ("scaleX", b.rest_scale[0], 1), ("scaleY", b.rest_scale[1], 1)):
            if num(value) != default:
                e[key] = num(value)
        bones.append(e)

    slots = []
    for s in rig.slots_in_draw_order():
        e = {"name": s.name, "bone": s.bone}
        if s.active_attachment is not None:
            e["attachment"] = s.active_attachment
        slots.append(e)

    def mesh(att: MeshAttachment):
        encoded = []
        for (x, y), ws in zip(att.vertices, att.weights):
            encoded.append(len(ws))
            for bone, w in ws:
                bx, by, _ = rest_inv[bone] @ np.array([x, y, 1.0])
                encoded += [bone_index[bone], num(bx), num(by), num(w)]
        return {
            "type": "mesh",
            "path": att.texture_ref,
            "uvs": [num(c) for uv in att.uvs for c in uv],
            "triangles": [int(i) for t in att.triangles for i in t],
            "vertices": encoded,
        }

    draw = [s.name for s in rig.slots_in_draw_order()]
    skins = []
    for sk in rig.skins:
        atts = {}
        for slot in sorted(sk.entries, key=lambda s: draw.index(s) if s in draw else len(draw)):
            name = sk.entries[slot]
            atts[slot] = {name: mesh(rig.attachment(name))}
        skins.append({"name": sk.name, "attachments": atts})

    animations = {}
    for clip in clips:
        per_bone = {}
        for bone in names:
            entry = {}
            rot = clip.timeline(bone, Property.ROTATION)
            if rot is not None:
                entry["rotate"] = [_key(t, rot.interpolation, angle=v) for t, v in zip(rot.times, rot.values)]
            merged = _merged_translate(clip, bone)
            if merged is not None:
                times, xs, ys, interp = merged
                entry["translate"] = [_key(t, interp, x=x, y=y) for t, x, y in zip(times, xs, ys)]
            if entry:
                per_bone[bone] = entry
        animations[clip.name] = {"bones": per_bone}

    doc = {"skeleton": header, "bones": bones, "slots": slots, "skins": skins}
    if clips:
        doc["animations"] = animations
    # hash the exported content itself so equal rigs hash equally regardless
    # of in-memory slot or attachment order
    header["hash"] = _content_hash(doc)
    return _dumps(doc)


_TOP_KEYS = {"skeleton", "bones", "slots", "skins", "animations"}
_BONE_KEYS = {"name", "parent", "length", "rotation", "x", "y", "scaleX", "scaleY", "color"}
_SLOT_KEYS = {"name", "bone", "attachment", "color"}
_MESH_KEYS = {"type", "path", "uvs", "triangles", "vertices", "hull", "edges", "width", "height"}


def _check_keys(obj, allowed, path):
    if not isinstance(obj, dict):
        raise SchemaViolation(path, "expected an object")
    for key in obj:
        if key not in allowed:
            raise UnsupportedFeature(key, f"{path}/{key}")


def _spine_curve(key, path):
    curve = key.get("curve")
    if curve is None:
        return Interpolation.LINEAR
    if curve == "stepped":
        return Interpolation.STEPPED
    raise UnsupportedFeature("curve", f"{path}/curve")


def import_spine_json(data):
    """Parse a Spine 3.8 subset document into ``(rig, clips)``."""
    d = _loads(data, "Spine document")
    _check_keys(d, _TOP_KEYS, "")
    header = _get(d, "skeleton", "", dict, {})
    skeleton_id = header.get("skeletonId") or header.get("hash") or "spine"

    bones = []
    for i, b in enumerate(_list(d, "bones", "")):
        p = f"/bones/{i}"
        for key in ("shearX", "shearY", "transform", "skin", "inheritRotation", "inheritScale"):
            if isinstance(b, dict) and key in b:
                raise UnsupportedFeature(key, f"{p}/{key}")
        _check_keys(b, _BONE_KEYS, p)
        bones.append(Bone2D(
            name=_get(b, "name", p, str),
            parent=_get(b, "parent", p, str, None),
            length=float(_get(b, "length", p, float, 0.0)),
            rest_rotation=float(_get(b, "rotation", p, float, 0.0)),
            rest_translation=(float(_get(b, "x", p, float, 0.0)), float(_get(b, "y", p, float, 0.0))),
            rest_scale=(float(_get(b, "scaleX", p, float, 1.0)), float(_get(b, "scaleY", p, float, 1.0))),
        ))
    bone_names = [b.name for b in bones]
    slots = []
    for i, s in enumerate(_list(d, "slots", "", [])):
        p = f"/slots/{i}"
        for key in ("blend", "dark"):
            if isinstance(s, dict) and key in s:
                raise UnsupportedFeature(key, f"{p}/{key}")
        _check_keys(s, _SLOT_KEYS, p)
        slots.append(Slot(_get(s, "name", p, str), _get(s, "bone", p, str), i,
                          _get(s, "attachment", p, str, None)))
    slot_bone = {s.name: s.bone for s in slots}

    partial = Rig2D(skeleton_id, tuple(bones))
    try:
        rest = world_transforms(partial)
    except Exception as exc:
        raise SchemaViolation("/bones", str(exc)) from None

    attachments: dict[str, MeshAttachment] = {}
    skins = []
    skin_list = _get(d, "skins", "", (list, dict), [])
    if isinstance(skin_list, dict):
        raise UnsupportedFeature("skins object form (pre-3.8)", "/skins")
    for i, sk in enumerate(skin_list):
        p = f"/skins/{i}"
        for key in ("bones", "ik", "transform", "path"):
            if isinstance(sk, dict) and key in sk:
                raise UnsupportedFeature(key, f"{p}/{key}")
        _check_keys(sk, {"name", "attachments"}, p)
        entries = {}
        for slot, atts in _get(sk, "attachments", p, dict, {}).items():
            sp = f"{p}/attachments/{slot}"
            if not isinstance(atts, dict) or len(atts) != 1:
                raise UnsupportedFeature("multiple attachments per slot", sp)
            (att_name, att), = atts.items()
            ap = f"{sp}/{att_name}"
            if not isinstance(att, dict):
                raise SchemaViolation(ap, "expected an object")
            kind = att.get("type", "region")
            if kind != "mesh":
                raise UnsupportedFeature(f"{kind} attachment", f"{ap}/type")
            _check_keys(att, _MESH_KEYS, ap)
            mesh = _import_mesh(att_name, att, ap, bone_names, rest, slot_bone.get(slot))
            seen = attachments.get(att_name)
            if seen is not None and seen != mesh:
                raise UnsupportedFeature("attachment name reused with different data", ap)
            attachments.setdefault(att_name, mesh)
            entries[slot] = att_name
        skins.append(Skin(_get(sk, "name", p, str), entries))

    textures = header.get("textures")
    if not isinstance(textures, dict):
        textures = {a.texture_ref: a.texture_ref for a in attachments.values() if a.texture_ref}
    rig = Rig2D(skeleton_id, tuple(bones), tuple(slots), tuple(attachments.values()), tuple(skins),
                {str(k): str(v) for k, v in textures.items()})
    report = validate_rig(rig)
    if report:
        _raise_report(report)

    info = header.get("clipInfo") if isinstance(header.get("clipInfo"), dict) else {}
    clips = []
    for name, anim in _get(d, "animations", "", dict, {}).items():
        p = f"/animations/{name}"
        _check_keys(anim, {"bones"}, p)
        timelines = []
        for bone, tls in _get(anim, "bones", p, dict, {}).items():
            bp = f"{p}/bones/{bone}"
            _check_keys(tls, {"rotate", "translate"}, bp)
            if bone not in bone_names:
                raise InvalidReference(bp, f"unknown bone {bone!r}")
            if "rotate" in tls:
                keys = _list(tls, "rotate", bp)
                times, vals, interp = _keys(keys, f"{bp}/rotate", ("angle",))
                timelines.append(Timeline(bone, Property.ROTATION, times, vals[:, 0], interp))
            if "translate" in tls:
                keys = _list(tls, "translate", bp)
                times, vals, interp = _keys(keys, f"{bp}/translate", ("x", "y"))
                timelines.append(Timeline(bone, Property.TRANSLATE_X, times, vals[:, 0], interp))
                timelines.append(Timeline(bone, Property.TRANSLATE_Y, times, vals[:, 1], interp))
        ci = info.get(name, {}) if isinstance(info.get(name), dict) else {}
        end = max((float(tl.times[-1]) for tl in timelines if len(tl)), default=0.0)
        clips.append(AnimationClip(name, skeleton_id, float(ci.get("duration", end)),
                                   float(ci.get("fps", header.get("fps", 30))), tuple(timelines)))
    return rig, clips


def _keys(keys, path, fields):
    times, vals, interps = [], [], set()
    for n, k in enumerate(keys):
        kp = f"{path}/{n}"
        _check_keys(k, {"time", "curve", *fields}, kp)
        times.append(float(_get(k, "time", kp, float, 0.0)))
        vals.append([float(_get(k, f, kp, float, 0.0)) for f in fields])
        if n < len(keys) - 1 or "curve" in k:
            interps.add(_spine_curve(k, kp))
    if len(interps) > 1:
        raise UnsupportedFeature("per-key curve changes", path)
    interp = interps.pop() if interps else Interpolation.LINEAR
    try:
        return np.array(times), np.array(vals).reshape(len(times), len(fields)), interp
    except ValueError as exc:
        raise SchemaViolation(path, str(exc)) from None


def _import_mesh(name, att, path, bone_names, rest, slot_bone):
    uv_flat = _list(att, "uvs", path)
    if len(uv_flat) % 2:
        raise SchemaViolation(f"{path}/uvs", "odd number of uv coordinates")
    uvs = tuple((float(uv_flat[k]), float(uv_flat[k + 1])) for k in range(0, len(uv_flat), 2))
    tri_flat = _list(att, "triangles", path)
    if len(tri_flat) % 3:
        raise SchemaViolation(f"{path}/triangles", "triangle index count not a multiple of 3")
    tris = tuple(tuple(int(i) for i in tri_flat[k:k + 3]) for k in range(0, len(tri_flat), 3))
    raw = _list(att, "vertices", path)
    n = len(uvs)
    verts, weights = [], []
    if len(raw) == 2 * n:
        if slot_bone is None or slot_bone not in rest:
            raise InvalidReference(path, "unweighted mesh in a slot with no known bone")
        m = rest[slot_bone]
        for k in range(n):
            x, y, _ = m @ np.array([float(raw[2 * k]), float(raw[2 * k + 1]), 1.0])
            verts.append((float(x), float(y)))
            weights.append(((slot_bone, 1.0),))
    else:
        pos = 0
        try:
            for _ in range(n):
                count = int(raw[pos])
                pos += 1
                ws, acc = [], np.zeros(3)
                for _ in range(count):
                    bi, bx, by, w = raw[pos:pos + 4]
                    pos += 4
                    bone = bone_names[int(bi)]
                    ws.append((bone, float(w)))
                    acc += float(w) * (rest[bone] @ np.array([float(bx), float(by), 1.0]))
                total = sum(w for _, w in ws)
                acc = acc / total if total > 0 else acc
                verts.append((float(acc[0]), float(acc[1])))
                weights.append(tuple(ws))
        except (IndexError, ValueError, TypeError):
            raise SchemaViolation(f"{path}/vertices", "malformed weighted vertex array") from None
        if pos != len(raw):
            raise SchemaViolation(f"{path}/vertices", "weighted vertex array length does not match uvs")
    weights, bad = normalize_weights(weights)
    if bad:
        raise SchemaViolation(f"{path}/vertices", f"WeightSumViolation: vertex {bad[0]}")
    return MeshAttachment(name, tuple(verts), tris, uvs, weights, str(att.get("path", name)))


# -- segmentation manifests ------------------------------------------------

BASE_LABELS = ("head", "torso", "left_arm", "right_arm", "left_leg", "right_leg", "clothing")


@dataclass(frozen=True)
class Region:
    label: str
    image: str
    anchor: tuple[float, float]
    z_order: int

    @property
    def is_accessory(self):
        return self.label.startswith("accessory:")


@dataclass(frozen=True)
class SegmentationManifest:
    regions: tuple[Region, ...]
    base_dir: str = "."

    def draw_order(self) -> list[Region]:
        return sorted(self.regions, key=lambda r: r.z_order)

    def image_path(self, region: Region) -> str:
        return os.path.join(self.base_dir, region.image)


def load_segmentation_manifest(data, base_dir=".") -> SegmentationManifest:
    """Parse and validate ``{"regions": [{label, image, anchor, z_order}]}``.

    Image paths resolve against ``base_dir`` and must exist.
    """
    d = _loads(data, "segmentation manifest")
    regions = []
    seen, z_seen = set(), set()
    for i, r in enumerate(_list(d, "regions", "")):
        p = f"/regions/{i}"
        label = _get(r, "label", p, str)
        if label not in BASE_LABELS and not (label.startswith("accessory:") and len(label) > 10):
            raise SchemaViolation(f"{p}/label", f"unknown region label {label!r}")
        if label in seen and not label.startswith("accessory:"):
            raise DuplicateLabel(f"{p}/label: {label!r} appears more than once")
        seen.add(label)
        image = _get(r, "image", p, str)
        if not os.path.isfile(os.path.join(base_dir, image)):
            raise MissingImage(f"{p}/image: {image!r} not found under {base_dir!r}")
        z = _get(r, "z_order", p, int)
        if z in z_seen:
            raise SchemaViolation(f"{p}/z_order", f"z_order {z} used twice")
        z_seen.add(z)
        regions.append(Region(label, image, _vec(_get(r, "anchor", p, list), 2, f"{p}/anchor"), z))
    return SegmentationManifest(tuple(regions), str(base_dir))


def read_segmentation_manifest(path) -> SegmentationManifest:
    path = Path(path)
    return load_segmentation_manifest(path.read_bytes(), path.parent)


def scaffold_rig(manifest: SegmentationManifest, bones, label_bones: dict | None = None,
                 skeleton_id: str = "scaffold") -> Rig2D:
    """Seed a rig with one slot and one textured quad per manifest region.

    ``label_bones`` maps region labels (``accessory`` for any accessory) to the
    bone each quad is weighted to; unmapped labels bind to the root bone.
    """
    from PIL import Image

    bones = tuple(bones)
    root = next(b.name for b in bones if b.parent is None)
    label_bones = label_bones or {}
    slots, atts, textures, used = [], [], {}, {}
    for z, region in enumerate(manifest.draw_order()):
        base = region.label.replace(":", "_")
        used[base] = used.get(base, 0) + 1
        name = base if used[base] == 1 else f"{base}_{used[base]}"
        key = "accessory" if region.is_accessory and region.label not in label_bones else region.label
        bone = label_bones.get(key, root)
        with Image.open(manifest.image_path(region)) as im:
            w, h = im.size
        x, y = region.anchor
        atts.append(MeshAttachment(
            name=name,
            vertices=((x, y), (x + w, y), (x + w, y + h), (x, y + h)),
            triangles=((0, 1, 2), (0, 2, 3)),
            uvs=((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)),
            weights=tuple(((bone, 1.0),) for _ in range(4)),
            texture_ref=name,
        ))
        textures[name] = region.image
        slots.append(Slot(name, bone, z, name))
    skin = Skin(DEFAULT_SKIN, {s.name: s.name for s in slots})
    return Rig2D(skeleton_id, bones, tuple(slots), tuple(atts), (skin,), textures)
