"""Deterministic software rasterizer for posed rigs and clip previews.

Nearest-neighbour texturing, no anti-aliasing: identical inputs always give
byte-identical images.  The camera maps rig space to pixels with a uniform
scale and a translation; rows grow downwards.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MissingTexture
from .gif import encode_gif, quantize
from .retarget import AnimationClip, check_clip_for_rig, sample_clip
from .rig import BonePoseValues, Rig2D, skin_vertices, world_transforms


class RenderMode(str, enum.Enum):
    SKELETON_LINES = "SkeletonLines"
    MESH_WIREFRAME = "MeshWireframe"
    TEXTURED = "Textured"


@dataclass(frozen=True)
class RenderOptions:
    width: int = 256
    height: int = 256
    background: tuple[int, int, int, int] = (255, 255, 255, 255)
    mode: RenderMode = RenderMode.SKELETON_LINES
    camera_translate: tuple[float, float] | None = None  # None: image centre
    camera_scale: float = 1.0
    line_color: tuple[int, int, int, int] = (0, 0, 0, 255)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image size must be at least 1x1")
        if not self.camera_scale > 0:
            raise ValueError("camera scale must be > 0")
        object.__setattr__(self, "mode", RenderMode(self.mode))

    def to_pixels(self, pts) -> np.ndarray:
        t = self.camera_translate
        if t is None:
            t = (self.width / 2.0, self.height / 2.0)
        return np.asarray(pts, dtype=float) * self.camera_scale + np.asarray(t, dtype=float)


@dataclass(frozen=True)
class FrameImage:
    width: int
    height: int
    pixels: np.ndarray  # (height, width, 4) uint8, row-major, top-left origin

    @property
    def buffer(self) -> bytes:
        return self.pixels.tobytes()

    def to_pil(self):
        from PIL import Image
        return Image.fromarray(self.pixels, "RGBA")


def draw_line(img: np.ndarray, p0, p1, color):
    """Plot the pixels a segment passes through (uniform DDA sampling)."""
    (x0, y0), (x1, y1) = p0, p1
    steps = int(math.ceil(max(abs(x1 - x0), abs(y1 - y0)))) + 1
    xs = np.floor(np.linspace(x0, x1, steps + 1)).astype(np.int64)
    ys = np.floor(np.linspace(y0, y1, steps + 1)).astype(np.int64)
    h, w = img.shape[:2]
    ok = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
    img[ys[ok], xs[ok]] = color


def fill_triangle(img: np.ndarray, tri, color=None, uvs=None, texture=None):
    """Fill pixels whose centres fall inside ``tri``; texture lookups are nearest."""
    tri = np.asarray(tri, dtype=float)
    h, w = img.shape[:2]
    (ax, ay), (bx, by), (cx, cy) = tri
    area = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    if area == 0 or not np.isfinite(area):
        return
    x_lo = max(int(math.floor(tri[:, 0].min())), 0)
    x_hi = min(int(math.ceil(tri[:, 0].max())), w - 1)
    y_lo = max(int(math.floor(tri[:, 1].min())), 0)
    y_hi = min(int(math.ceil(tri[:, 1].max())), h - 1)
    if x_lo > x_hi or y_lo > y_hi:
        return
    px, py = np.meshgrid(np.arange(x_lo, x_hi + 1) + 0.5, np.arange(y_lo, y_hi + 1) + 0.5)
    w0 = ((bx - px) * (cy - py) - (by - py) * (cx - px)) / area
    w1 = ((cx - px) * (ay - py) - (cy - py) * (ax - px)) / area
    w2 = 1.0 - w0 - w1
    inside = (w0 >= 0) & (w1 >= 0) & (w2 >= 0)
    if not inside.any():
        return
    rows = py[inside].astype(np.int64)
    cols = px[inside].astype(np.int64)
    if texture is None:
        img[rows, cols] = color
        return
    uv = np.asarray(uvs, dtype=float)
    u = w0[inside] * uv[0, 0] + w1[inside] * uv[1, 0] + w2[inside] * uv[2, 0]
    v = w0[inside] * uv[0, 1] + w1[inside] * uv[1, 1] + w2[inside] * uv[2, 1]
    th, tw = texture.shape[:2]
    tx = np.clip(np.floor(u * tw), 0, tw - 1).astype(np.int64)
    ty = np.clip(np.floor(v * th), 0, th - 1).astype(np.int64)
    texels = texture[ty, tx]
    opaque = texels[:, 3] >= 128
    img[rows[opaque], cols[opaque]] = texels[opaque]


def load_textures(rig: Rig2D, base_dir=".") -> dict[str, np.ndarray]:
    """Read each texture PNG of ``rig`` as an RGBA array."""
    from PIL import Image

    out = {}
    for name, rel in rig.textures.items():
        path = Path(base_dir) / rel
        try:
            with Image.open(path) as im:
                out[name] = np.asarray(im.convert("RGBA"))
        except OSError as exc:
            raise MissingTexture(f"texture {name!r}: {exc}") from None
    return out


def render_frame(rig: Rig2D, pose: BonePoseValues | None, opts: RenderOptions,
                 textures: dict | None = None) -> FrameImage:
    img = np.empty((opts.height, opts.width, 4), dtype=np.uint8)
    img[:] = opts.background
    if opts.mode == RenderMode.SKELETON_LINES:
        lengths = {b.name: b.length for b in rig.bones}
        for name, m in world_transforms(rig, pose).items():
            if lengths[name] <= 0:
                continue  # a zero-length bone has no segment to draw
            ends = (m @ np.array([[0.0, lengths[name]], [0.0, 0.0], [1.0, 1.0]]))[:2].T
            p0, p1 = opts.to_pixels(ends)
            draw_line(img, p0, p1, opts.line_color)
    else:
        textures = textures or {}
        for slot in rig.slots_in_draw_order():
            if slot.active_attachment is None:
                continue
            att = rig.attachment(slot.active_attachment)
            pts = opts.to_pixels(skin_vertices(rig, pose, att.name))
            if opts.mode == RenderMode.MESH_WIREFRAME:
                for tri in att.triangles:
                    for a, b in ((0, 1), (1, 2), (2, 0)):
                        draw_line(img, pts[tri[a]], pts[tri[b]], opts.line_color)
                continue
            if att.texture_ref not in textures:
                raise MissingTexture(f"slot {slot.name!r}: texture {att.texture_ref!r} not loaded")
            tex = textures[att.texture_ref]
            uvs = np.asarray(att.uvs, dtype=float)
            for tri in att.triangles:
                fill_triangle(img, pts[list(tri)], uvs=uvs[list(tri)], texture=tex)
    return FrameImage(opts.width, opts.height, img)


def frame_times(duration: float, fps: float) -> np.ndarray:
    """Uniform sample times from 0: ``ceil(duration * fps) + 1`` of them."""
    if not fps > 0:
        raise ValueError("fps must be > 0")
    count = int(math.ceil(duration * fps - 1e-9)) + 1 if duration > 0 else 1
    return np.minimum(np.arange(count) / fps, max(duration, 0.0))


def fit_camera(rig: Rig2D, clip: AnimationClip | None, opts: RenderOptions, fps: float = 30.0,
               margin: float = 0.08) -> RenderOptions:
    """Options whose camera frames every bone endpoint the clip reaches."""
    from dataclasses import replace

    times = frame_times(clip.duration, fps) if clip is not None else [0.0]
    lengths = np.array([b.length for b in rig.bones])
    pts = []
    for t in times:
        pose = sample_clip(clip, float(t)) if clip is not None else None
        for m, ln in zip(world_transforms(rig, pose).values(), lengths):
            pts.append(m[:2, 2])
            pts.append((m @ np.array([ln, 0.0, 1.0]))[:2])
    pts = np.asarray(pts)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-6)
    usable = np.array([opts.width, opts.height]) * (1.0 - 2.0 * margin)
    scale = float(min(usable / span))
    centre = (lo + hi) / 2.0
    translate = (opts.width / 2.0 - scale * centre[0], opts.height / 2.0 - scale * centre[1])
    return replace(opts, camera_scale=scale, camera_translate=translate)


def render_clip_frames(rig: Rig2D, clip: AnimationClip, opts: RenderOptions, fps: float,
                       textures: dict | None = None) -> list[FrameImage]:
    check_clip_for_rig(clip, rig)
    return [render_frame(rig, sample_clip(clip, float(t)), opts, textures)
            for t in frame_times(clip.duration, fps)]


def render_clip_gif(rig: Rig2D, clip: AnimationClip, opts: RenderOptions, fps: float,
                    textures: dict | None = None) -> bytes:
    frames = render_clip_frames(rig, clip, opts, fps, textures)
    delay = int(round(100.0 / fps))
    return encode_gif([quantize(f.pixels) for f in frames], delay)


def write_png_sequence(frames, out_dir, prefix="frame_") -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    digits = max(4, len(str(len(frames) - 1)))
    paths = []
    for i, f in enumerate(frames):
        p = out_dir / f"{prefix}{i:0{digits}d}.png"
        f.to_pil().save(p)
        paths.append(p)
    return paths
