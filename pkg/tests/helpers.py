import numpy as np

from mocap2d.bvh import CHANNEL_NAMES, ROTATION_CHANNELS, BvhDocument, BvhJoint, BvhMotion


def random_chain_doc(rng, max_depth=6, n_frames=3, rotations_only=False, branch=0.0):
    """Random joint chain (optionally branching) with random channel orders."""
    counter = [0]
    pool = ROTATION_CHANNELS if rotations_only else CHANNEL_NAMES

    def make(depth):
        counter[0] += 1
        name = f"J{counter[0]}"
        k = int(rng.integers(0, len(pool) + 1))
        channels = tuple(str(c) for c in rng.permutation(pool)[:k])
        offset = tuple(rng.uniform(-5, 5, 3))
        children = []
        if depth < max_depth:
            children.append(make(depth + 1))
            if rng.random() < branch:
                children.append(make(depth + 1))
        end = None if children else tuple(rng.uniform(-3, 3, 3))
        return BvhJoint(name, offset, channels, children, end)

    depth = int(rng.integers(1, max_depth + 1))
    root = make(max_depth - depth + 1)
    n_ch = sum(len(j.channels) for j in root.walk())
    frames = np.zeros((n_frames, n_ch))
    col = 0
    for j in root.walk():
        for ch in j.channels:
            frames[:, col] = rng.uniform(-180, 180, n_frames) if ch.endswith("rotation") else rng.uniform(-10, 10, n_frames)
            col += 1
    return BvhDocument(root, BvhMotion(1 / 30, frames))


def assert_docs_close(a, b, tol=1e-6):
    ja, jb = a.joints(), b.joints()
    assert [j.name for j in ja] == [j.name for j in jb]
    for x, y in zip(ja, jb):
        assert x.channels == y.channels
        assert len(x.children) == len(y.children)
        np.testing.assert_allclose(x.offset, y.offset, atol=tol)
        assert (x.end_site_offset is None) == (y.end_site_offset is None)
        if x.end_site_offset is not None:
            np.testing.assert_allclose(x.end_site_offset, y.end_site_offset, atol=tol)
    assert a.motion.frame_count == b.motion.frame_count
    assert abs(a.motion.frame_time - b.motion.frame_time) <= tol
    np.testing.assert_allclose(a.motion.frames, b.motion.frames, atol=tol)


def _close(x, y, tol):
    return np.allclose(np.asarray(x, dtype=float), np.asarray(y, dtype=float), atol=tol, rtol=0)


def assert_rigs_close(a, b, tol=1e-6):
    assert a.skeleton_id == b.skeleton_id
    assert [x.name for x in a.bones] == [x.name for x in b.bones]
    for x, y in zip(a.bones, b.bones):
        assert x.parent == y.parent
        assert _close([x.length, x.rest_rotation, *x.rest_translation, *x.rest_scale],
                      [y.length, y.rest_rotation, *y.rest_translation, *y.rest_scale], tol), (x, y)
    slot_key = lambda r: sorted((s.name, s.bone, s.draw_order_index, s.active_attachment)  # noqa: E731
                                for s in r.slots)
    assert slot_key(a) == slot_key(b)
    atts_a = {m.name: m for m in a.attachments}
    atts_b = {m.name: m for m in b.attachments}
    assert atts_a.keys() == atts_b.keys()
    for name, m in atts_a.items():
        n = atts_b[name]
        assert m.triangles == n.triangles and m.texture_ref == n.texture_ref
        assert _close(m.vertices, n.vertices, tol), name
        assert _close(m.uvs, n.uvs, tol), name
        assert [[bn for bn, _ in ws] for ws in m.weights] == [[bn for bn, _ in ws] for ws in n.weights]
        assert _close([w for ws in m.weights for _, w in ws], [w for ws in n.weights for _, w in ws], tol)
    assert [(s.name, s.entries) for s in a.skins] == [(s.name, s.entries) for s in b.skins]
    assert a.textures == b.textures


def assert_clips_close(a, b, tol=1e-6):
    assert a.name == b.name and a.skeleton_id == b.skeleton_id
    assert abs(a.duration - b.duration) <= tol and abs(a.fps - b.fps) <= tol
    ta = {(t.bone, t.property): t for t in a.timelines}
    tb = {(t.bone, t.property): t for t in b.timelines}
    assert ta.keys() == tb.keys()
    for key, t in ta.items():
        u = tb[key]
        assert t.interpolation == u.interpolation, key
        assert len(t) == len(u), key
        assert _close(t.times, u.times, tol) and _close(t.values, u.values, tol), key
