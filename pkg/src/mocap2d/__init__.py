"""Retarget BVH motion capture onto layered 2D skeletal character rigs."""
from .bvh import (
    BvhDocument,
    BvhJoint,
    BvhMotion,
    JointPose,
    forward_kinematics,
    parse_bvh,
    read_bvh,
    resample_motion,
    serialize_bvh,
    world_positions,
)
from .interchange import (
    export_spine_json,
    import_spine_json,
    load_clip,
    load_rig,
    load_segmentation_manifest,
    save_clip,
    save_rig,
    scaffold_rig,
)
from .library import MotionEntry, MotionLibrary, index_library, search
from .planes import (
    BodyPartClass,
    Plane,
    PlaneAssignment,
    PrincipalAxes,
    assign_projection_planes,
    classify_joints,
    covariance_matrix,
    principal_axes,
)
from .render import RenderMode, RenderOptions, render_clip_gif, render_frame
from .retarget import (
    AnimationClip,
    Interpolation,
    JointMap,
    Property,
    Timeline,
    bone_angle_2d,
    decimate_clip,
    decimate_keyframes,
    extract_clip,
    project_joint,
    sample_clip,
    unwrap_angles,
)
from .rig import (
    Bone2D,
    BonePoseValues,
    MeshAttachment,
    Rig2D,
    Skin,
    Slot,
    attach_skin,
    skin_vertices,
    validate_rig,
    world_transforms,
)

__version__ = "0.1.0"
