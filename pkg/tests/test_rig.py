import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mocap2d import synth
from mocap2d.errors import InvalidRig, SkeletonMismatch, UnknownAttachment, UnknownBoneInPose, UnknownSkin
from mocap2d.rig import (
    Bone2D,
    BonePoseValues,
    MeshAttachment,
    Rig2D,
    Skin,
    Slot,
    attach_skin,
    check_same_skeleton,
    normalize_weights,
    require_valid,
    skin_vertices,
    topological_bones,
    validate_rig,
    world_transforms,
)

from .oracles import rig_matrix_stack


def codes(rig):
    return {i.code for i in validate_rig(rig)}


def test_fixture_rigs_are_valid(humanoid):
    assert validate_rig(humanoid) == []
    assert validate_rig(synth.swing_rig()) == []
    for seed in range(3):
        assert validate_rig(synth.random_rig(30, seed)) == []


def test_bone_invariants():
    bones = (Bone2D("a"), Bone2D("b"), Bone2D("a", "zz", -1.0))
    assert {"MultipleRoots", "DuplicateBoneName", "NegativeLength", "UnknownParent"} <= codes(Rig2D("x", bones))


def test_no_root_and_cycle():
    rig = Rig2D("x", (Bone2D("a", "b"), Bone2D("b", "a")))
    assert {"NoRoot", "Cycle"} <= codes(rig)
    with pytest.raises(InvalidRig):
        topological_bones(rig)


def _mesh(**kw):
    base = dict(name="m", vertices=((0, 0), (1, 0), (0, 1)), triangles=((0, 1, 2),),
                uvs=((0, 0), (1, 0), (0, 1)), weights=((("a", 1.0),),) * 3)
    base.update(kw)
    return MeshAttachment(**base)


@pytest.mark.parametrize("kw, code", [
    (dict(uvs=((0, 0), (1, 0))), "UVCountMismatch"),
    (dict(uvs=((0, 0), (1.5, 0), (0, 1))), "UVOutOfRange"),
    (dict(triangles=((0, 1, 3),)), "TriangleIndexOutOfRange"),
    (dict(weights=((("a", 1.0),),) * 2), "WeightCountMismatch"),
    (dict(weights=((("a", 0.6),), (("a", 1.0),), (("a", 1.0),))), "WeightSumViolation"),
    (dict(weights=((), (("a", 1.0),), (("a", 1.0),))), "EmptyWeights"),
    (dict(weights=((("q", 1.0),), (("a", 1.0),), (("a", 1.0),))), "UnknownWeightBone"),
    (dict(weights=((("a", -0.5), ("a", 1.5)), (("a", 1.0),), (("a", 1.0),))), "NegativeWeight"),
])
def test_mesh_invariants(kw, code):
    rig = Rig2D("x", (Bone2D("a"),), (Slot("s", "a", 0, "m"),), (_mesh(**kw),), (Skin("default", {"s": "m"}),))
    assert code in codes(rig)


def test_weight_sum_message_names_vertex():
    rig = Rig2D("x", (Bone2D("a"),), (), (_mesh(weights=((("a", 1.0),), (("a", 0.5),), (("a", 1.0),))),))
    [issue] = [i for i in validate_rig(rig) if i.code == "WeightSumViolation"]
    assert issue.path == "/attachments/0/weights/1"
    assert "vertex 1" in issue.message


def test_slot_and_skin_invariants():
    rig = Rig2D("x", (Bone2D("a"),),
                (Slot("s", "zz", 0, "nope"), Slot("s", "a", 5)),
                (_mesh(),),
                (Skin("armor", {"ghost": "m", "s": "missing"}),))
    assert {"UnknownSlotBone", "UnknownAttachment", "DuplicateSlotName", "DrawOrderNotPermutation",
            "UnknownSlot", "MissingDefaultSkin"} <= codes(rig)
    with pytest.raises(InvalidRig) as err:
        require_valid(rig)
    assert err.value.report


def test_skeleton_mismatch(humanoid):
    other = replace(humanoid, bones=humanoid.bones[:-1])
    with pytest.raises(SkeletonMismatch):
        check_same_skeleton(humanoid, other)
    check_same_skeleton(humanoid, synth.humanoid_rig(costume="formal"))


# -- transforms ------------------------------------------------------------

def test_topological_order_with_forward_references():
    rig = Rig2D("x", (Bone2D("c", "b"), Bone2D("a"), Bone2D("b", "a")))
    assert [b.name for b in topological_bones(rig)] == ["a", "b", "c"]
    world = world_transforms(rig)
    assert list(world) == ["c", "a", "b"]


def test_single_bone_rotation():
    rig = Rig2D("x", (Bone2D("a", None, 10, 0, (3, 4)),))
    m = world_transforms(rig, BonePoseValues({"a": 90}))["a"]
    np.testing.assert_allclose(m @ [10, 0, 1], (3, 14, 1), atol=1e-12)


def test_unknown_bone_in_pose(humanoid):
    with pytest.raises(UnknownBoneInPose):
        world_transforms(humanoid, BonePoseValues({"tail": 1}))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_world_transforms_match_oracle(seed):
    r = np.random.default_rng(seed)
    rig = synth.random_rig(12, seed % 1000, n_skins=1)
    rot = {b.name: float(r.uniform(-180, 180)) for b in rig.bones if r.random() < 0.7}
    trans = {b.name: tuple(r.uniform(-5, 5, 2)) for b in rig.bones if r.random() < 0.3}
    got = world_transforms(rig, BonePoseValues(rot, trans))
    want = rig_matrix_stack(rig, rot, trans)
    for name in want:
        np.testing.assert_allclose(got[name], want[name], atol=1e-9)


# -- skinning --------------------------------------------------------------

def test_rest_pose_identity_all_attachments():
    for seed in range(5):
        rig = synth.random_rig(30, seed)
        for att in rig.attachments:
            v = skin_vertices(rig, BonePoseValues(), att.name)
            assert np.abs(v - np.asarray(att.vertices)).max() <= 1e-9


def test_rigid_weighting_follows_bone():
    rig = synth.swing_rig()
    v = skin_vertices(rig, BonePoseValues({"arm": 90}), "arm_mesh")
    # arm pivots at (5, 0); (15, -1) swings to (6, 10)
    np.testing.assert_allclose(v[1], (6, 10), atol=1e-9)


def test_blend_is_weighted_average():
    bones = (Bone2D("a"), Bone2D("b", "a"))
    mesh = MeshAttachment("m", ((1.0, 0.0),), (), ((0.0, 0.0),), ((("a", 0.25), ("b", 0.75)),))
    rig = Rig2D("x", bones, (), (mesh,))
    pose = BonePoseValues({"b": 180})
    v = skin_vertices(rig, pose, "m")
    np.testing.assert_allclose(v[0], 0.25 * np.array([1, 0]) + 0.75 * np.array([-1, 0]), atol=1e-12)


def test_unknown_attachment(humanoid):
    with pytest.raises(UnknownAttachment):
        skin_vertices(humanoid, None, "cape")


@settings(max_examples=30, deadline=None)
@given(st.floats(-360, 360), st.floats(-50, 50), st.floats(-50, 50))
def test_uniform_rigid_motion_preserves_distances(angle, tx, ty):
    rig = synth.swing_rig()
    v0 = np.asarray(rig.attachments[0].vertices)
    v = skin_vertices(rig, BonePoseValues({"base": angle}, {"base": (tx, ty)}), "arm_mesh")
    d0 = np.linalg.norm(v0[:, None] - v0[None], axis=2)
    d1 = np.linalg.norm(v[:, None] - v[None], axis=2)
    np.testing.assert_allclose(d0, d1, atol=1e-9)


# -- skins -----------------------------------------------------------------

def test_attach_skin_falls_back_to_default(humanoid):
    armored = attach_skin(humanoid, "armor")
    active = {s.name: s.active_attachment for s in armored.slots}
    assert active["torso"] == "torso_armor_casual"
    assert active["head"] == "head_casual"
    assert armored.bones == humanoid.bones
    with pytest.raises(UnknownSkin):
        attach_skin(humanoid, "tuxedo")


def test_normalize_weights_band():
    ws = ((("a", 0.5), ("b", 0.45)), (("a", 0.5),), (("a", 1.0),))
    out, bad = normalize_weights(ws)
    assert bad == [1]
    assert math.isclose(sum(w for _, w in out[0]), 1.0, abs_tol=1e-12)
    assert out[1] == ws[1]


# -- tabulated vectors -----------------------------------------------------

def _minimal_rig(weight=1.0):
    quad = MeshAttachment("quad", ((0, 0), (1, 0), (1, 1), (0, 1)), ((0, 1, 2), (0, 2, 3)),
                          ((0, 0), (1, 0), (1, 1), (0, 1)), ((("root", weight),),) + ((("root", 1.0),),) * 3)
    return Rig2D("m", (Bone2D("root", None, 1),), (Slot("s", "root", 0, "quad"),), (quad,),
                 (Skin("default", {"s": "quad"}),))


def test_minimal_rig_valid():
    assert validate_rig(_minimal_rig()) == []


def test_weight_sum_097_reported_with_index():
    [issue] = validate_rig(_minimal_rig(0.97))
    assert issue.code == "WeightSumViolation" and "vertex 0" in issue.message


def test_empty_pose_equals_rest(humanoid):
    a, b = world_transforms(humanoid, BonePoseValues()), world_transforms(humanoid)
    for name in a:
        np.testing.assert_array_equal(a[name], b[name])


def test_quarter_turn_maps_x_to_y():
    rig = Rig2D("x", (Bone2D("a"),))
    m = world_transforms(rig, BonePoseValues({"a": 90}))["a"]
    np.testing.assert_allclose(m @ [1, 0, 0], (0, 1, 0), atol=1e-9)


def test_ten_bone_trees_against_oracle(rng):
    for seed in range(10):
        rig = synth.random_rig(10, seed, n_skins=1)
        rot = {b.name: float(rng.uniform(-180, 180)) for b in rig.bones}
        trans = {b.name: tuple(rng.uniform(-5, 5, 2)) for b in rig.bones}
        got, want = world_transforms(rig, BonePoseValues(rot, trans)), rig_matrix_stack(rig, rot, trans)
        for n in want:
            assert np.abs(got[n] - want[n]).max() <= 1e-6


def test_skin_single_bone_quarter_turn():
    mesh = MeshAttachment("m", ((1.0, 0.0),), (), ((0.0, 0.0),), ((("a", 1.0),),))
    rig = Rig2D("x", (Bone2D("a"),), (), (mesh,))
    np.testing.assert_allclose(skin_vertices(rig, BonePoseValues({"a": 90}), "m")[0], (0, 1), atol=1e-9)


def test_skin_blend_midpoint():
    mesh = MeshAttachment("m", ((0.0, 0.0),), (), ((0.0, 0.0),), ((("A", 0.5), ("B", 0.5)),))
    rig = Rig2D("x", (Bone2D("A"), Bone2D("B", "A")), (), (mesh,))
    v = skin_vertices(rig, BonePoseValues({}, {"B": (2, 0)}), "m")
    np.testing.assert_allclose(v[0], (1, 0), atol=1e-12)


def test_attach_default_skin(humanoid):
    rig = attach_skin(humanoid, "default")
    assert {s.name: s.active_attachment for s in rig.slots} == humanoid.skin("default").entries
