"""
Reading a BVH walk and choosing projection planes
=================================================

Builds the procedural 31-joint walk, round-trips it through BVH text, and
prints which 2D plane each joint is projected onto.
"""

import numpy as np

from mocap2d import synth
from mocap2d.bvh import parse_bvh, serialize_bvh, world_positions
from mocap2d.planes import assign_projection_planes

# a two-second walk at 30 fps
doc = synth.humanoid_bvh("walk", n_frames=61)
print("joints:", len(doc.joints()), "channels:", doc.channel_count)

# the text form is what other tools exchange
text = serialize_bvh(doc)
again = parse_bvh(text)
print("round-trip max error:", np.abs(again.motion.frames - doc.motion.frames).max())

# world positions come back as (frames, nodes, xyz)
pos = world_positions(doc)
print("position array:", pos.shape)

# torso joints stay frontal; legs swing front-to-back so they pick the side view
for a in assign_projection_planes(doc):
    if a.joint_name in ("Hips", "Head", "LeftUpLeg", "LeftLeg", "LeftArm"):
        print(f"{a.joint_name:10s} {a.body_class.value:9s} {a.plane.value:7s} {a.retained_variance_ratio:.3f}")
