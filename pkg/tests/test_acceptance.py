"""The eleven acceptance criteria, one test each.

Every test appends a ``[PASS]``/``[FAIL]`` line that the terminal summary
prints under "acceptance criteria"; run ``pytest tests/test_acceptance.py -s``
to also see them inline.
"""
import io
import json
import time

import numpy as np
from PIL import Image

from mocap2d import synth
from mocap2d.bvh import BvhDocument, BvhJoint, BvhMotion, forward_kinematics, write_bvh
from mocap2d.cli import run
from mocap2d.interchange import (
    export_spine_json,
    import_spine_json,
    load_clip,
    load_rig,
    read_clip,
    save_clip,
    save_rig,
    write_rig,
)
from mocap2d.library import index_library, search
from mocap2d.planes import BodyPartClass, Plane, assign_projection_planes, principal_axes
from mocap2d.render import RenderOptions, fit_camera, frame_times, render_clip_gif
from mocap2d.retarget import Property, decimate_clip, decimate_keyframes, extract_clip, sample_clip
from mocap2d.rig import BonePoseValues, attach_skin, skin_vertices, world_transforms

from .conftest import ACCEPTANCE_LINES
from .helpers import assert_clips_close, assert_rigs_close, random_chain_doc
from .oracles import fk_matrix_stack, plane_variance

SEED = 20241014


def report(number, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _retarget_walk(n_frames=61):
    doc = synth.humanoid_bvh("walk", n_frames)
    rig, jmap = synth.humanoid_rig(), synth.humanoid_joint_map()
    return doc, rig, extract_clip(doc, assign_projection_planes(doc), jmap, rig, "walk")


def test_criterion_01_fk_oracle():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(20):
        doc = random_chain_doc(rng, max_depth=6, n_frames=3)
        for f in range(doc.motion.frame_count):
            want = fk_matrix_stack(doc, f)
            for pose in forward_kinematics(doc, f):
                worst = max(worst, float(np.abs(pose.world_position - want[pose.joint_name]).max()))
    report(1, "FK matches matrix-stack oracle on 20 random chains", worst <= 1e-6, f"max err {worst:.2e}")


def test_criterion_02_pca():
    rng = np.random.default_rng(SEED)
    worst_recon = worst_trace = 0.0
    for k in range(50):
        rank = 1 + k % 3
        a = rng.normal(size=(3, rank)) * rng.uniform(0.01, 20)
        c = a @ a.T
        axes = principal_axes(np.zeros(3), c)
        v, lam = axes.eigenvectors, axes.eigenvalues  # rows of v are eigenvectors
        recon = v.T @ np.diag(lam) @ v
        worst_recon = max(worst_recon, float(np.abs(recon - c).max() / np.abs(c).max()))
        worst_trace = max(worst_trace, abs(float(lam.sum()) - float(np.trace(c))))
    ok = worst_recon <= 1e-7 and worst_trace <= 1e-9
    report(2, "eigen-decomposition of 50 PSD matrices", ok,
           f"recon rel err {worst_recon:.2e}, trace err {worst_trace:.2e}")


def _limb_doc(rng, n_frames=30):
    amp = rng.uniform(0, 90, 3) * (rng.random(3) < 0.8)
    phase = rng.uniform(0, 2 * np.pi, 3)
    t = np.linspace(0, 2 * np.pi, n_frames)
    arm = BvhJoint("LeftArm", tuple(rng.uniform(-10, 10, 3)), ("Zrotation", "Xrotation", "Yrotation"), [],
                   tuple(rng.uniform(-10, 10, 3)))
    hips = BvhJoint("Hips", (0, 0, 0), ("Xposition", "Yposition", "Zposition", "Yrotation"), [arm])
    frames = np.zeros((n_frames, 7))
    frames[:, :3] = rng.normal(0, 2, (n_frames, 3))
    frames[:, 3] = rng.uniform(-30, 30) * np.sin(t)
    for k in range(3):
        frames[:, 4 + k] = amp[k] * np.sin(t + phase[k])
    return BvhDocument(hips, BvhMotion(1 / 30, frames))


def test_criterion_03_plane_optimality():
    rng = np.random.default_rng(SEED)
    violations = limbs = head_torso = head_torso_frontal = 0
    for _ in range(200):
        doc = _limb_doc(rng)
        stacks = [fk_matrix_stack(doc, f) for f in range(doc.motion.frame_count)]
        for a in assign_projection_planes(doc):
            if a.body_class == BodyPartClass.HEAD_TORSO:
                head_torso += 1
                head_torso_frontal += a.plane == Plane.FRONTAL
                continue
            limbs += 1
            parent = doc.parents()[a.joint_name]
            traj = [list(s[a.joint_name] - s[parent]) for s in stacks]
            chosen = plane_variance(traj, a.plane.value)
            other = plane_variance(traj, "Side" if a.plane == Plane.FRONTAL else "Frontal")
            violations += chosen < other - 1e-9
    for a in assign_projection_planes(synth.humanoid_bvh("walk", 61)):
        if a.body_class == BodyPartClass.HEAD_TORSO:
            head_torso += 1
            head_torso_frontal += a.plane == Plane.FRONTAL
    ok = violations == 0 and limbs >= 200 and head_torso == head_torso_frontal
    report(3, "limb plane keeps at least the rejected plane's variance; HeadTorso is Frontal", ok,
           f"{limbs} limb trajectories, {violations} violations, {head_torso_frontal}/{head_torso} HeadTorso Frontal")


def test_criterion_04_retarget_continuity():
    doc, _, clip = _retarget_walk(61)
    rot = [tl for tl in clip.timelines if tl.property == Property.ROTATION]
    max_step = max(float(np.abs(np.diff(tl.values)).max()) for tl in rot)
    swing = synth.swing_bvh(10, 90)
    sclip = extract_clip(swing, assign_projection_planes(swing), synth.swing_joint_map(), synth.swing_rig(), "s")
    ramp_err = float(np.abs(sclip.timeline("arm", Property.ROTATION).values - np.linspace(0, 90, 10)).max())
    ok = doc.motion.frame_count >= 60 and max_step <= 180 and ramp_err <= 1e-6
    report(4, "walk rotations continuous; swing reproduces 0->90 ramp", ok,
           f"{len(rot)} timelines, max step {max_step:.2f} deg, ramp err {ramp_err:.2e}")


def test_criterion_05_round_trip():
    rig = synth.random_rig(30, seed=7)
    clips = [synth.random_clip(rig, "alpha", seed=1), synth.random_clip(rig, "beta", seed=2)]
    assert len(rig.bones) == 30 and len(rig.skins) == 2
    native = save_rig(rig)
    assert_rigs_close(rig, load_rig(native))
    for c in clips:
        assert_clips_close(c, load_clip(save_clip(c)))
    spine = export_spine_json(rig, clips)
    rig2, clips2 = import_spine_json(spine)
    assert_rigs_close(rig, rig2)
    for c in clips:
        assert_clips_close(c, next(x for x in clips2 if x.name == c.name))
    rerun_rig = synth.random_rig(30, seed=7)
    rerun_clips = [synth.random_clip(rerun_rig, "alpha", seed=1), synth.random_clip(rerun_rig, "beta", seed=2)]
    deterministic = (export_spine_json(rerun_rig, rerun_clips) == spine and save_rig(rerun_rig) == native
                     and export_spine_json(rig, clips) == spine)
    report(5, "native and Spine round trips within 1e-6; byte-deterministic export", deterministic,
           f"{len(spine)} Spine bytes")


def test_criterion_06_unified_reuse():
    _, rig_a, clip = _retarget_walk(61)
    rig_b = attach_skin(synth.humanoid_rig(costume="formal"), "armor")
    assert rig_a.skeleton_id == rig_b.skeleton_id
    assert {s.active_attachment for s in rig_a.slots} != {s.active_attachment for s in rig_b.slots}
    mismatches = 0
    for t in np.linspace(0, clip.duration, 100):
        pose = sample_clip(clip, float(t))
        wa, wb = world_transforms(rig_a, pose), world_transforms(rig_b, pose)
        mismatches += sum(not np.array_equal(wa[n], wb[n]) for n in wa)
    report(6, "one clip drives two skins with identical bone transforms", mismatches == 0,
           f"100 samples, {mismatches} mismatches")


def test_criterion_07_skinning():
    rigs = [synth.humanoid_rig(), synth.humanoid_rig(costume="formal"), synth.swing_rig()]
    rigs += [synth.random_rig(30, seed=s) for s in range(5)]
    worst_rest = worst_sum = 0.0
    meshes = 0
    for rig in rigs:
        loaded = load_rig(save_rig(rig))
        for att in loaded.attachments:
            meshes += 1
            v = skin_vertices(loaded, BonePoseValues(), att.name)
            worst_rest = max(worst_rest, float(np.abs(v - np.asarray(att.vertices)).max()))
            for ws in att.weights:
                worst_sum = max(worst_sum, abs(sum(w for _, w in ws) - 1.0))
    ok = worst_rest <= 1e-9 and worst_sum <= 1e-6
    report(7, "rest pose is identity; weights sum to 1", ok,
           f"{meshes} meshes, rest err {worst_rest:.2e}, weight-sum err {worst_sum:.2e}")


def test_criterion_08_decimation():
    _, rig, walk = _retarget_walk(61)
    clips = [walk] + [synth.random_clip(synth.random_rig(30, s), f"r{s}", seed=s, n_keys=60) for s in range(3)]
    worst = {}
    for tol in (0.1, 0.5, 2.0):
        err = 0.0
        for clip in clips:
            dec = decimate_clip(clip, tol)
            for tl in clip.timelines:
                d = dec.timeline(tl.bone, tl.property)
                err = max(err, max(abs(d.sample(t) - v) for t, v in zip(tl.times, tl.values)))
        worst[tol] = err
    kept_all = all(len(decimate_keyframes(tl, 0.0)) == len(tl) for c in clips for tl in c.timelines)
    kept_all &= all(len(a) == len(b) for c in clips for a, b in zip(c.timelines, decimate_clip(c, 0.0).timelines))
    ok = all(worst[t] <= t for t in worst) and kept_all
    report(8, "decimated replay within tolerance; tolerance 0 keeps all keys", ok,
           ", ".join(f"tol {t}: {e:.3f}" for t, e in worst.items()))


def test_criterion_09_library(library_dir):
    lib = index_library(library_dir)
    names = {"idle": "idle", "wave": "waving", "walk": "walking", "run": "running", "jump": "jumping"}
    misses = []
    for preset, word in names.items():
        for query in (preset, word):
            top, score = search(lib, query, k=5)[0]
            if top.id != preset or score != 1.0:
                misses.append(query)
    report(9, "each preset ranks first for its own name with score 1.0", not misses,
           f"misses: {misses}" if misses else "10 queries")


def test_criterion_10_performance():
    doc = synth.humanoid_bvh("walk", 1000)
    rig, jmap = synth.humanoid_rig(), synth.humanoid_joint_map()
    assert len(doc.joints()) == 31
    t0 = time.perf_counter()
    clip = decimate_clip(extract_clip(doc, assign_projection_planes(doc), jmap, rig, "walk"))
    t_retarget = time.perf_counter() - t0

    _, _, walk = _retarget_walk(60)
    opts = fit_camera(rig, walk, RenderOptions(512, 512))
    t0 = time.perf_counter()
    data = render_clip_gif(rig, walk, opts, 30)
    t_gif = time.perf_counter() - t0
    n = Image.open(io.BytesIO(data)).n_frames
    ok = t_retarget < 1.0 and t_gif < 5.0 and n == 60 and len(clip.timelines) > 0
    report(10, "1000-frame retarget < 1 s; 60-frame 512x512 GIF < 5 s", ok,
           f"retarget {t_retarget:.3f} s, GIF {t_gif:.3f} s for {n} frames")


def test_criterion_11_end_to_end(tmp_path):
    rig = synth.humanoid_rig()
    write_rig(rig, tmp_path / "rig.json")
    write_bvh(synth.humanoid_bvh("run", 40), tmp_path / "run.bvh")
    (tmp_path / "map.txt").write_text(synth.joint_map_text(synth.humanoid_joint_map()))
    codes = [
        run(["retarget", "--bvh", str(tmp_path / "run.bvh"), "--rig", str(tmp_path / "rig.json"),
             "--map", str(tmp_path / "map.txt"), "--out", str(tmp_path / "run.clip.json")]),
        run(["export", "--rig", str(tmp_path / "rig.json"), "--clip", str(tmp_path / "run.clip.json"),
             "--out", str(tmp_path / "run.spine.json")]),
        run(["render", "--rig", str(tmp_path / "rig.json"), "--clip", str(tmp_path / "run.clip.json"),
             "--out", str(tmp_path / "run.gif"), "--size", "128x128", "--fps", "24"]),
    ]
    clip = read_clip(tmp_path / "run.clip.json")
    expected = len(frame_times(clip.duration, 24))
    im = Image.open(tmp_path / "run.gif")
    frames = 0
    for k in range(im.n_frames):
        im.seek(k)
        im.load()
        frames += 1
    spine = json.loads((tmp_path / "run.spine.json").read_text())
    ok = codes == [0, 0, 0] and frames == expected and "run" in spine.get("animations", {})
    report(11, "retarget -> export -> render exits 0; GIF has the contracted frame count", ok,
           f"exit codes {codes}, {frames}/{expected} frames")
