"""Command line entry point: ``mocap2d <subcommand> [flags]``.

Exit codes: 0 success, 1 domain error (the error class name is printed on
stderr), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bvh, interchange, library, planes, render, retarget
from .errors import Mocap2dError
from .rig import attach_skin, validate_rig

log = logging.getLogger("mocap2d")


class UsageError(Exception):
    pass


def _existing(path: str, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{what} not found: {path}")
    return p


def _rules(args):
    if args.plane_rules:
        return planes.load_rules(_existing(args.plane_rules, "plane rules file"))
    return planes.DEFAULT_RULES


def _emit(args, payload: dict, text_lines):
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        for line in text_lines:
            print(line)


def _size(text: str):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like 512x512, got {text!r}") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError("size must be at least 1x1")
    return w, h


def _positive(kind):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
        return v
    return parse


def _non_negative(text):
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


# -- subcommands -----------------------------------------------------------

def cmd_inspect(args):
    doc = bvh.read_bvh(_existing(args.bvh, "BVH file"))
    rules = _rules(args)
    classes = planes.classify_joints(doc, rules)
    parents = doc.parents()
    depth = {}
    for name in doc.node_names():
        depth[name] = 0 if parents[name] is None else depth[parents[name]] + 1
    assignments = planes.assign_projection_planes(doc, classes) if doc.motion.frame_count else []
    m = doc.motion
    payload = {
        "joint_count": len(doc.joints()),
        "end_site_count": len(doc.node_names()) - len(doc.joints()),
        "channel_count": doc.channel_count,
        "frame_count": m.frame_count,
        "frame_time": m.frame_time,
        "fps": m.fps,
        "duration": m.duration,
        "joints": [{"name": n, "parent": parents[n], "depth": depth[n]} for n in doc.node_names()],
        "planes": [{"joint": a.joint_name, "class": a.body_class.value, "plane": a.plane.value,
                    "retained_variance_ratio": a.retained_variance_ratio} for a in assignments],
    }
    lines = [f"joints: {payload['joint_count']}", f"end sites: {payload['end_site_count']}",
             f"channels: {payload['channel_count']}", f"frames: {m.frame_count}",
             f"fps: {m.fps:.3f}", f"duration: {m.duration:.3f} s", "hierarchy:"]
    lines += ["  " + "  " * depth[n] + n for n in doc.node_names()]
    lines.append("planes:")
    lines += [f"  {a.joint_name:<20} {a.body_class.value:<9} {a.plane.value:<7} "
              f"retained={a.retained_variance_ratio:.4f}" for a in assignments]
    _emit(args, payload, lines)


def cmd_retarget(args):
    doc = bvh.read_bvh(_existing(args.bvh, "BVH file"))
    rig = interchange.read_rig(_existing(args.rig, "rig file"))
    jmap = retarget.load_joint_map(_existing(args.map, "joint map file"))
    if args.fps is not None:
        doc = bvh.resample_motion(doc, args.fps)
    classes = planes.classify_joints(doc, _rules(args))
    assignments = planes.assign_projection_planes(doc, classes)
    name = args.name or Path(args.bvh).stem
    clip = retarget.extract_clip(doc, assignments, jmap, rig, name)
    raw_keys = sum(len(t) for t in clip.timelines)
    clip = retarget.decimate_clip(clip, args.tolerance)
    kept = sum(len(t) for t in clip.timelines)
    interchange.write_clip(clip, args.out)
    low = [a for a in assignments if a.joint_name in jmap.entries and a.retained_variance_ratio < 0.5]
    for a in low:
        log.warning("joint %s keeps only %.0f%% of its motion variance in the %s plane",
                    a.joint_name, 100 * a.retained_variance_ratio, a.plane.value)
    payload = {"clip": str(args.out), "name": clip.name, "duration": clip.duration, "fps": clip.fps,
               "timelines": len(clip.timelines), "keys_before": raw_keys, "keys_after": kept}
    _emit(args, payload, [f"wrote {args.out}: {len(clip.timelines)} timelines, "
                          f"{kept}/{raw_keys} keys kept, duration {clip.duration:.6g} s"])


def cmd_export(args):
    rig = interchange.read_rig(_existing(args.rig, "rig file"))
    clips = [interchange.read_clip(_existing(c, "clip file")) for c in (args.clip or [])]
    data = interchange.export_spine_json(rig, clips)
    Path(args.out).write_bytes(data)
    _emit(args, {"out": str(args.out), "bytes": len(data), "clips": [c.name for c in clips]},
          [f"wrote {args.out} ({len(data)} bytes, {len(clips)} animation(s))"])


def cmd_render(args):
    rig_path = _existing(args.rig, "rig file")
    rig = interchange.read_rig(rig_path)
    clip = interchange.read_clip(_existing(args.clip, "clip file"))
    if args.skin:
        rig = attach_skin(rig, args.skin)
    w, h = args.size
    opts = render.RenderOptions(w, h, mode=render.RenderMode(args.mode))
    if args.origin is not None or args.zoom is not None:
        origin = args.origin if args.origin is not None else (w / 2.0, h / 2.0)
        opts = render.RenderOptions(w, h, mode=opts.mode, camera_translate=origin,
                                    camera_scale=args.zoom or 1.0)
    else:
        opts = render.fit_camera(rig, clip, opts, args.fps)
    textures = (render.load_textures(rig, rig_path.parent)
                if opts.mode == render.RenderMode.TEXTURED else None)
    out = Path(args.out)
    if out.suffix.lower() == ".gif":
        data = render.render_clip_gif(rig, clip, opts, args.fps, textures)
        out.write_bytes(data)
        n = len(render.frame_times(clip.duration, args.fps))
    else:
        frames = render.render_clip_frames(rig, clip, opts, args.fps, textures)
        render.write_png_sequence(frames, out)
        n = len(frames)
    _emit(args, {"out": str(out), "frames": n, "width": w, "height": h, "mode": opts.mode.value},
          [f"wrote {out}: {n} frame(s) at {w}x{h}"])


def cmd_search(args):
    root = _existing(args.library, "library directory")
    lib = library.index_library(root, args.tags)
    results = library.search(lib, args.query, args.k)
    payload = {"query": args.query, "warnings": lib.warnings,
               "results": [{"id": e.id, "score": s, "duration": e.duration, "path": e.bvh_path,
                            "tags": list(e.tags)} for e, s in results]}
    lines = [f"{i + 1}. {e.id}  score={s:.4f}  duration={e.duration:.3g}s  tags={','.join(e.tags)}"
             for i, (e, s) in enumerate(results)] or ["no matches"]
    for w in lib.warnings:
        print(f"warning: {w}", file=sys.stderr)
    _emit(args, payload, lines)


def cmd_validate(args):
    rig = interchange.read_rig(_existing(args.rig, "rig file"), strict=False)
    report = validate_rig(rig)
    payload = {"valid": not report,
               "issues": [{"code": i.code, "path": i.path, "message": i.message} for i in report]}
    _emit(args, payload, ["rig is valid"] if not report else
          [f"{i.code} at {i.path}" + (f": {i.message}" if i.message else "") for i in report])
    return 1 if report else 0


# -- parser ----------------------------------------------------------------

def _global_flags(p, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--verbose", "-v", action="store_true", default=d(False), help="debug logging")
    p.add_argument("--seed", type=int, default=d(0), help="seed for randomized utilities")
    p.add_argument("--plane-rules", default=d(None), metavar="PATH",
                   help="joint classification rules (substring = HeadTorso|Limb)")
    p.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mocap2d", description="BVH to 2D skeletal animation toolkit")
    _global_flags(parser, suppress=False)
    common = _Parser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("inspect", parents=[common], help="joint tree, frame stats, plane choices")
    p.add_argument("--bvh", required=True)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("retarget", parents=[common], help="BVH -> 2D clip")
    p.add_argument("--bvh", required=True)
    p.add_argument("--rig", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tolerance", type=_non_negative, default=retarget.DEFAULT_TOLERANCE,
                   help="decimation tolerance (degrees / pixels)")
    p.add_argument("--fps", type=_positive(float), default=None, help="resample the BVH first")
    p.add_argument("--name", default=None, help="clip name (default: BVH file stem)")
    p.set_defaults(func=cmd_retarget)

    p = sub.add_parser("export", parents=[common], help="rig + clips -> Spine JSON")
    p.add_argument("--rig", required=True)
    p.add_argument("--clip", action="append", help="clip file (repeatable)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("render", parents=[common], help="clip preview as GIF or PNG sequence")
    p.add_argument("--rig", required=True)
    p.add_argument("--clip", required=True)
    p.add_argument("--out", required=True, help="*.gif file, or a directory for PNG frames")
    p.add_argument("--mode", default="SkeletonLines", choices=[m.value for m in render.RenderMode])
    p.add_argument("--size", type=_size, default=(512, 512), metavar="WxH")
    p.add_argument("--fps", type=_positive(float), default=30.0)
    p.add_argument("--skin", default=None)
    p.add_argument("--origin", type=lambda s: tuple(float(v) for v in s.split(",")), default=None,
                   metavar="X,Y", help="pixel position of the rig origin (disables auto-fit)")
    p.add_argument("--zoom", type=_positive(float), default=None, help="pixels per rig unit")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("search", parents=[common], help="query a tagged BVH library")
    p.add_argument("--library", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("-k", type=_positive(int), default=5)
    p.add_argument("--tags", default=None, help="tags file (default: <library>/tags.json)")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("validate", parents=[common], help="print a rig's validation report")
    p.add_argument("--rig", required=True)
    p.set_defaults(func=cmd_validate)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s: %(message)s")
        return args.func(args) or 0
    except UsageError as exc:
        print(parser.format_usage().rstrip(), file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Mocap2dError as exc:
        print(f"error: {exc.name}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
