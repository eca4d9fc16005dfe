"""
Retargeting a walk onto a 2D rig and previewing it
==================================================

Maps BVH joints to rig bones, extracts a clip, thins its keys and writes an
animated GIF next to this script.
"""

from pathlib import Path

from mocap2d import synth
from mocap2d.planes import assign_projection_planes
from mocap2d.render import RenderMode, RenderOptions, fit_camera, render_clip_gif
from mocap2d.retarget import decimate_clip, extract_clip

out_dir = Path(__file__).resolve().parent / "out"
out_dir.mkdir(exist_ok=True)

doc = synth.humanoid_bvh("walk", n_frames=61)
rig = synth.humanoid_rig()
jmap = synth.humanoid_joint_map()

clip = extract_clip(doc, assign_projection_planes(doc), jmap, rig, "walk")
thin = decimate_clip(clip, 0.5)
before = sum(len(t) for t in clip.timelines)
after = sum(len(t) for t in thin.timelines)
print(f"keys: {before} -> {after}")

# frame the whole clip automatically, then draw mesh edges
opts = fit_camera(rig, thin, RenderOptions(256, 256, mode=RenderMode.MESH_WIREFRAME))
gif = render_clip_gif(rig, thin, opts, fps=15)
(out_dir / "walk_wire.gif").write_bytes(gif)
print("wrote", out_dir / "walk_wire.gif", len(gif), "bytes")
