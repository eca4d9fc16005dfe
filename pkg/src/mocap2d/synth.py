"""Procedural test assets: a CMU-style humanoid BVH with preset motions, a
matching 16-bone 2D rig, and seeded random rigs/clips.

Everything here is deterministic for a given seed so it can back fixtures,
demos and benchmarks without shipping binary data.
"""
from __future__ import annotations

import math

import numpy as np

from .bvh import BvhDocument, BvhJoint, BvhMotion
from .retarget import AnimationClip, Interpolation, JointMap, Property, Timeline
from .rig import DEFAULT_SKIN, Bone2D, MeshAttachment, Rig2D, Skin, Slot

ROOT_CHANNELS = ("Xposition", "Yposition", "Zposition", "Zrotation", "Yrotation", "Xrotation")
JOINT_CHANNELS = ("Zrotation", "Yrotation", "Xrotation")
PRESETS = ("idle", "wave", "walk", "run", "jump")
PRESET_TAGS = {
    "idle": ["idle", "stand", "breathe"],
    "wave": ["wave", "waving", "greet"],
    "walk": ["walk", "walking", "locomotion"],
    "run": ["run", "running", "locomotion"],
    "jump": ["jump", "jumping"],
}


def _j(name, offset, children=(), end=None):
    return BvhJoint(name, tuple(float(v) for v in offset), JOINT_CHANNELS, list(children),
                    None if end is None else tuple(float(v) for v in end))


def _side(sign, prefix, short):
    leg = _j(f"{short}HipJoint", (0, 0, 0), [
        _j(f"{prefix}UpLeg", (sign * 1.5, -1.0, 0.5), [
            _j(f"{prefix}Leg", (0, -7.5, 0), [
                _j(f"{prefix}Foot", (0, -7.0, 0), [
                    _j(f"{prefix}ToeBase", (0, -0.5, 2.0), end=(0, 0, 1.0)),
                ]),
            ]),
        ]),
    ])
    arm = _j(f"{prefix}Shoulder", (0, 0, 0), [
        _j(f"{prefix}Arm", (sign * 3.0, 1.5, 0), [
            _j(f"{prefix}ForeArm", (sign * 4.5, 0, 0), [
                _j(f"{prefix}Hand", (sign * 4.0, 0, 0), [
                    _j(f"{prefix}FingerBase", (sign * 0.5, 0, 0), [
                        _j(f"{short}Fingers", (sign * 0.8, 0, 0), end=(sign * 0.6, 0, 0)),
                    ]),
                    _j(f"{short}Thumb", (sign * 0.3, 0, 0.3), end=(sign * 0.4, 0, 0.4)),
                ]),
            ]),
        ]),
    ])
    return leg, arm


def humanoid_hierarchy() -> BvhJoint:
    """31 joints, CMU layout: 6 root channels and 3 rotations per other joint."""
    l_leg, l_arm = _side(1, "Left", "L")
    r_leg, r_arm = _side(-1, "Right", "R")
    spine1 = _j("Spine1", (0, 2, 0), [
        _j("Neck", (0, 2, 0), [_j("Neck1", (0, 1, 0), [_j("Head", (0, 1, 0), end=(0, 2.5, 0))])]),
        l_arm, r_arm,
    ])
    back = _j("LowerBack", (0, 0, 0), [_j("Spine", (0, 2, 0), [spine1])])
    return BvhJoint("Hips", (0.0, 0.0, 0.0), ROOT_CHANNELS, [l_leg, r_leg, back])


def _motion_values(kind: str, t: np.ndarray) -> dict[str, dict[str, np.ndarray]]:
    """Channel curves (degrees / units) per joint; absent channels stay 0."""
    z = np.zeros_like(t)
    v: dict[str, dict[str, np.ndarray]] = {"Hips": {"Yposition": z + 16.0}}
    arm_down = -70.0
    v["LeftArm"] = {"Zrotation": z + arm_down}
    v["RightArm"] = {"Zrotation": z - arm_down}
    if kind == "idle":
        ph = 2 * math.pi * 0.5 * t
        v["Spine"] = {"Xrotation": 2.0 * np.sin(ph)}
        v["Head"] = {"Zrotation": 3.0 * np.sin(ph * 0.5)}
        v["LeftArm"]["Zrotation"] = arm_down - 3.0 + 2.0 * np.sin(ph)
        v["RightArm"]["Zrotation"] = -arm_down + 3.0 - 2.0 * np.sin(ph)
    elif kind == "wave":
        ph = 2 * math.pi * 1.5 * t
        v["RightArm"] = {"Zrotation": z - 150.0}
        v["RightForeArm"] = {"Zrotation": 20.0 + 30.0 * np.sin(ph)}
        v["Head"] = {"Zrotation": 5.0 * np.sin(ph / 3.0)}
    elif kind in ("walk", "run"):
        f, amp, knee, bob = (0.9, 25.0, 35.0, 0.3) if kind == "walk" else (1.6, 40.0, 70.0, 0.8)
        ph = 2 * math.pi * f * t
        v["Hips"]["Yposition"] = 16.0 + bob * np.sin(2 * ph)
        v["Hips"]["Zposition"] = (3.0 if kind == "walk" else 6.0) * t
        v["Hips"]["Yrotation"] = 4.0 * np.sin(ph)
        for name, phase in (("Left", 0.0), ("Right", math.pi)):
            v[f"{name}UpLeg"] = {"Xrotation": -amp * np.sin(ph + phase)}
            v[f"{name}Leg"] = {"Xrotation": knee * 0.5 * (1 - np.cos(ph + phase))}
            v[f"{name}Foot"] = {"Xrotation": 10.0 * np.sin(ph + phase)}
            sign = 1.0 if name == "Left" else -1.0
            v[f"{name}Arm"]["Yrotation"] = sign * 0.8 * amp * np.sin(ph + phase + math.pi)
            v[f"{name}ForeArm"] = {"Yrotation": sign * (10.0 + 15.0 * (1 - np.cos(ph + phase)))}
        v["Spine"] = {"Xrotation": z + (3.0 if kind == "walk" else 12.0)}
    elif kind == "jump":
        dur = t[-1] if t.size and t[-1] > 0 else 1.0
        s = t / dur
        crouch = np.where(s < 0.3, np.sin(s / 0.3 * math.pi), 0.0) + np.where(
            s > 0.75, np.sin((s - 0.75) / 0.25 * math.pi), 0.0)
        air = np.where((s >= 0.3) & (s <= 0.75), np.sin((s - 0.3) / 0.45 * math.pi), 0.0)
        v["Hips"]["Yposition"] = 16.0 - 3.0 * crouch + 8.0 * air
        for name in ("Left", "Right"):
            v[f"{name}UpLeg"] = {"Xrotation": -50.0 * crouch - 10.0 * air}
            v[f"{name}Leg"] = {"Xrotation": 90.0 * crouch + 15.0 * air}
            v[f"{name}Foot"] = {"Xrotation": -35.0 * crouch}
        v["LeftArm"]["Zrotation"] = arm_down + 130.0 * air
        v["RightArm"]["Zrotation"] = -arm_down - 130.0 * air
        v["Spine"] = {"Xrotation": 20.0 * crouch}
    elif kind != "zero":
        raise ValueError(f"unknown motion {kind!r}")
    if kind == "zero":
        v = {}
    return v


def humanoid_bvh(kind: str = "walk", n_frames: int = 61, fps: float = 30.0) -> BvhDocument:
    """Humanoid document with one of :data:`PRESETS` (or ``"zero"``) applied."""
    root = humanoid_hierarchy()
    t = np.arange(n_frames) / fps
    curves = _motion_values(kind, t)
    cols = []
    for j in root.walk():
        for ch in j.channels:
            cols.append(curves.get(j.name, {}).get(ch, np.zeros(n_frames)))
    frames = np.stack(cols, axis=1) if cols else np.zeros((n_frames, 0))
    return BvhDocument(root, BvhMotion(1.0 / fps, frames))


# -- 2D rigs ---------------------------------------------------------------

def bones_from_world(layout) -> tuple[Bone2D, ...]:
    """Build bones from ``(name, parent, world_xy, world_angle, length)`` rows."""
    world = {}
    out = []
    for name, parent, pos, angle, length in layout:
        if parent is None:
            out.append(Bone2D(name, None, float(length), float(angle), tuple(map(float, pos))))
        else:
            ppos, pang = world[parent]
            a = math.radians(pang)
            dx, dy = pos[0] - ppos[0], pos[1] - ppos[1]
            local = (round(math.cos(a) * dx + math.sin(a) * dy, 9),
                     round(-math.sin(a) * dx + math.cos(a) * dy, 9))
            out.append(Bone2D(name, parent, float(length), float(angle - pang), local))
        world[name] = (pos, angle)
    return tuple(out)


# Screen-style rig space: +y points down, so "up" is -90 degrees.
HUMANOID_LAYOUT = (
    ("hips", None, (0, 0), -90, 20),
    ("torso", "hips", (0, -20), -90, 40),
    ("neck", "torso", (0, -60), -90, 15),
    ("head", "neck", (0, -75), -90, 30),
    ("upper_arm_l", "torso", (30, -55), 90, 45),
    ("forearm_l", "upper_arm_l", (30, -10), 90, 40),
    ("hand_l", "forearm_l", (30, 30), 90, 15),
    ("upper_arm_r", "torso", (-30, -55), 90, 45),
    ("forearm_r", "upper_arm_r", (-30, -10), 90, 40),
    ("hand_r", "forearm_r", (-30, 30), 90, 15),
    ("thigh_l", "hips", (15, 10), 90, 75),
    ("shin_l", "thigh_l", (15, 85), 90, 70),
    ("foot_l", "shin_l", (15, 155), 60, 20),
    ("thigh_r", "hips", (-15, 10), 90, 75),
    ("shin_r", "thigh_r", (-15, 85), 90, 70),
    ("foot_r", "shin_r", (-15, 155), 120, 20),
)

HUMANOID_MAP = {
    "Hips": "hips", "Spine": "torso", "Neck": "neck", "Head": "head",
    "LeftArm": "upper_arm_l", "LeftForeArm": "forearm_l", "LeftHand": "hand_l",
    "RightArm": "upper_arm_r", "RightForeArm": "forearm_r", "RightHand": "hand_r",
    "LeftUpLeg": "thigh_l", "LeftLeg": "shin_l", "LeftFoot": "foot_l",
    "RightUpLeg": "thigh_r", "RightLeg": "shin_r", "RightFoot": "foot_r",
}


def humanoid_joint_map() -> JointMap:
    return JointMap(dict(HUMANOID_MAP), scale=10.0, flip_y=True)


def joint_map_text(jmap: JointMap) -> str:
    lines = [f"{k} = {v}" for k, v in jmap.entries.items()]
    lines += [f"scale = {jmap.scale}", f"flip_y = {'true' if jmap.flip_y else 'false'}"]
    return "\n".join(lines) + "\n"


def _quad(name, bone_pts, half_width, texture, weights_for):
    """Quad around a bone segment; ``weights_for(u)`` gives weights at fraction u."""
    (x0, y0), (x1, y1) = bone_pts
    dx, dy = x1 - x0, y1 - y0
    n = math.hypot(dx, dy) or 1.0
    nx, ny = -dy / n * half_width, dx / n * half_width
    verts = ((x0 + nx, y0 + ny), (x1 + nx, y1 + ny), (x1 - nx, y1 - ny), (x0 - nx, y0 - ny))
    verts = tuple((round(x, 6), round(y, 6)) for x, y in verts)
    return MeshAttachment(name, verts, ((0, 1, 2), (0, 2, 3)),
                          ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)),
                          (weights_for(0.0), weights_for(1.0), weights_for(1.0), weights_for(0.0)),
                          texture)


def humanoid_rig(skeleton_id: str = "humanoid-16", costume: str = "casual") -> Rig2D:
    """16-bone character with one mesh per bone and ``default`` + ``armor`` skins.

    ``costume`` only changes texture names and the torso mesh width, so rigs
    with different costumes still share the skeleton.
    """
    bones = bones_from_world(HUMANOID_LAYOUT)
    world = {name: (pos, ang, ln) for name, _, pos, ang, ln in HUMANOID_LAYOUT}

    def seg(name):
        (x, y), ang, ln = world[name]
        a = math.radians(ang)
        return (x, y), (x + ln * math.cos(a), y + ln * math.sin(a))

    atts, slots = [], []
    widths = {"torso": 22 if costume == "casual" else 26, "hips": 18, "head": 14, "neck": 6}
    for k, (name, *_rest) in enumerate(HUMANOID_LAYOUT):
        hw = widths.get(name, 7)
        if name.startswith(("upper_arm", "thigh")):
            child = {"upper_arm_l": "forearm_l", "upper_arm_r": "forearm_r",
                     "thigh_l": "shin_l", "thigh_r": "shin_r"}[name]
            wf = (lambda n, c: lambda u: ((n, 1.0),) if u == 0 else ((n, 0.5), (c, 0.5)))(name, child)
        else:
            wf = (lambda n: lambda u: ((n, 1.0),))(name)
        atts.append(_quad(f"{name}_{costume}", seg(name), hw, f"{name}_{costume}", wf))
        slots.append(Slot(name, name, k, f"{name}_{costume}"))
    armor = _quad(f"torso_armor_{costume}", seg("torso"), widths["torso"] + 4, f"torso_armor_{costume}",
                  lambda u: (("torso", 1.0),))
    atts.append(armor)
    skins = (Skin(DEFAULT_SKIN, {s.name: s.active_attachment for s in slots}),
             Skin("armor", {"torso": armor.name}))
    textures = {a.texture_ref: f"textures/{a.texture_ref}.png" for a in atts}
    return Rig2D(skeleton_id, bones, tuple(slots), tuple(atts), skins, textures)


def write_textures(rig: Rig2D, base_dir, size=(16, 16)):
    """Write a flat-colour PNG for every texture the rig references."""
    from pathlib import Path

    from PIL import Image

    base = Path(base_dir)
    for k, (name, rel) in enumerate(sorted(rig.textures.items())):
        path = base / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        hue = (k * 47) % 216
        color = (hue // 36 * 51, hue // 6 % 6 * 51, hue % 6 * 51, 255)
        Image.new("RGBA", size, color).save(path)


# -- two-joint swing -------------------------------------------------------

def swing_bvh(n_frames: int = 10, sweep: float = 90.0, fps: float = 30.0) -> BvhDocument:
    """Root plus one arm joint whose Zrotation ramps 0 -> ``sweep`` degrees."""
    arm = BvhJoint("Arm", (5.0, 0.0, 0.0), ("Zrotation", "Xrotation", "Yrotation"), [], (10.0, 0.0, 0.0))
    root = BvhJoint("Root", (0.0, 0.0, 0.0), ROOT_CHANNELS, [arm])
    frames = np.zeros((n_frames, 9))
    frames[:, 6] = np.linspace(0.0, sweep, n_frames)
    return BvhDocument(root, BvhMotion(1.0 / fps, frames))


def swing_rig(skeleton_id: str = "swing-2") -> Rig2D:
    bones = (Bone2D("base", None, 5.0), Bone2D("arm", "base", 10.0, 0.0, (5.0, 0.0)))
    mesh = MeshAttachment("arm_mesh", ((5.0, -1.0), (15.0, -1.0), (15.0, 1.0), (5.0, 1.0)),
                          ((0, 1, 2), (0, 2, 3)), ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)),
                          tuple(((("arm", 1.0),)) for _ in range(4)), "arm")
    return Rig2D(skeleton_id, bones, (Slot("arm", "arm", 0, "arm_mesh"),), (mesh,),
                 (Skin(DEFAULT_SKIN, {"arm": "arm_mesh"}),), {"arm": "textures/arm.png"})


def swing_joint_map() -> JointMap:
    return JointMap({"Root": "base", "Arm": "arm"}, scale=1.0, flip_y=False)


# -- random rigs and clips -------------------------------------------------

def random_rig(n_bones: int = 30, seed: int = 0, skeleton_id: str | None = None,
               n_skins: int = 2) -> Rig2D:
    """Random bone tree with one weighted mesh per slot and ``n_skins`` skins.

    Numbers are rounded to 3 decimals and weights drawn from a few exact
    splits so text round trips are representable.
    """
    rng = np.random.default_rng(seed)
    r3 = lambda x: round(float(x), 3)  # noqa: E731
    bones = [Bone2D("b0", None, r3(rng.uniform(5, 30)), r3(rng.uniform(-180, 180)),
                    (r3(rng.uniform(-50, 50)), r3(rng.uniform(-50, 50))))]
    for i in range(1, n_bones):
        parent = f"b{int(rng.integers(0, i))}"
        scale = (r3(rng.choice([1.0, 0.8, 0.5])), r3(rng.choice([1.0, 0.9])))
        bones.append(Bone2D(f"b{i}", parent, r3(rng.uniform(0, 40)), r3(rng.uniform(-180, 180)),
                            (r3(rng.uniform(-40, 40)), r3(rng.uniform(-40, 40))), scale))
    splits = ((1.0,), (0.5, 0.5), (0.25, 0.75), (0.125, 0.875), (0.25, 0.25, 0.5))
    n_slots = max(1, n_bones // 3)
    slots, atts = [], []
    order = rng.permutation(n_slots)
    picked = {0: list(range(n_slots))}
    for variant in range(1, n_skins):
        picked[variant] = [s for s in range(n_slots) if rng.random() < 0.6] or [0]
    for s in range(n_slots):
        for variant in range(n_skins):
            if s not in picked[variant]:
                continue
            n_v = int(rng.integers(3, 7))
            verts = tuple((r3(rng.uniform(-100, 100)), r3(rng.uniform(-100, 100))) for _ in range(n_v))
            tris = tuple((0, k, k + 1) for k in range(1, n_v - 1))
            uvs = tuple((r3(rng.uniform(0, 1)), r3(rng.uniform(0, 1))) for _ in range(n_v))
            weights = []
            for _ in range(n_v):
                split = splits[int(rng.integers(0, len(splits)))]
                chosen = rng.choice(n_bones, size=len(split), replace=False)
                weights.append(tuple((f"b{int(b)}", w) for b, w in zip(chosen, split)))
            atts.append(MeshAttachment(f"m{s}_{variant}", verts, tris, uvs, tuple(weights), f"tex{s}_{variant}"))
        slots.append(Slot(f"s{s}", f"b{int(rng.integers(0, n_bones))}", int(order[s]), f"m{s}_0"))
    skins = [Skin(DEFAULT_SKIN, {f"s{s}": f"m{s}_0" for s in range(n_slots)})]
    for variant in range(1, n_skins):
        skins.append(Skin(f"skin{variant}", {f"s{s}": f"m{s}_{variant}" for s in picked[variant]}))
    textures = {a.texture_ref: f"textures/{a.texture_ref}.png" for a in atts}
    return Rig2D(skeleton_id or f"random-{n_bones}-{seed}", tuple(bones), tuple(slots), tuple(atts),
                 tuple(skins), textures)


def random_clip(rig: Rig2D, name: str, seed: int = 0, n_keys: int = 20, fps: float = 30.0,
                stepped_fraction: float = 0.2) -> AnimationClip:
    rng = np.random.default_rng(seed)
    times = np.round(np.arange(n_keys) / fps, 6)
    timelines = []
    for b in rig.bones:
        if rng.random() < 0.7:
            interp = Interpolation.STEPPED if rng.random() < stepped_fraction else Interpolation.LINEAR
            vals = np.round(np.cumsum(rng.uniform(-20, 20, n_keys)), 3)
            timelines.append(Timeline(b.name, Property.ROTATION, times, vals, interp))
        if rng.random() < 0.3:
            for prop in (Property.TRANSLATE_X, Property.TRANSLATE_Y):
                timelines.append(Timeline(b.name, prop, times, np.round(rng.uniform(-10, 10, n_keys), 3)))
    return AnimationClip(name, rig.skeleton_id, float(times[-1]), fps, tuple(timelines))
