"""
Swapping skins and exporting to Spine JSON
==========================================

One clip drives two costumes of the same skeleton; the rig and clip are then
written out in the Spine 3.8 subset and read back.
"""

import numpy as np

from mocap2d import synth
from mocap2d.interchange import export_spine_json, import_spine_json
from mocap2d.planes import assign_projection_planes
from mocap2d.retarget import extract_clip, sample_clip
from mocap2d.rig import attach_skin, world_transforms

doc = synth.humanoid_bvh("wave", n_frames=60)
casual = synth.humanoid_rig()
armored = attach_skin(synth.humanoid_rig(costume="formal"), "armor")
clip = extract_clip(doc, assign_projection_planes(doc), synth.humanoid_joint_map(), casual, "wave")

# same skeleton, so the bones move identically whatever the costume
pose = sample_clip(clip, 1.0)
a, b = world_transforms(casual, pose), world_transforms(armored, pose)
print("identical bones:", all(np.array_equal(a[n], b[n]) for n in a))

data = export_spine_json(casual, [clip])
rig2, clips2 = import_spine_json(data)
print("spine bytes:", len(data), "bones back:", len(rig2.bones), "clips back:", [c.name for c in clips2])
