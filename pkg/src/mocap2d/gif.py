"""Minimal GIF89a writer with a fixed 216-colour palette.

Frames after the first are stored as the sub-rectangle that changed since the
previous frame (disposal "do not dispose"), which keeps encoding cheap for
mostly static previews.
"""
from __future__ import annotations

import struct

import numpy as np

MIN_CODE_SIZE = 8


def cube_palette() -> np.ndarray:
    """256x3 palette: the 6x6x6 web-safe cube followed by black padding."""
    levels = np.arange(6) * 51
    r, g, b = np.meshgrid(levels, levels, levels, indexing="ij")
    pal = np.zeros((256, 3), dtype=np.uint8)
    pal[:216] = np.stack([r.ravel(), g.ravel(), b.ravel()], axis=1)
    return pal


def quantize(rgb: np.ndarray) -> np.ndarray:
    """Nearest cube colour index for every pixel of an (H, W, 3+) array."""
    q = (rgb[..., :3].astype(np.uint16) + 25) // 51
    return (q[..., 0] * 36 + q[..., 1] * 6 + q[..., 2]).astype(np.uint8)


def lzw_encode(indices: bytes, min_code_size: int = MIN_CODE_SIZE) -> bytes:
    clear = 1 << min_code_size
    eoi = clear + 1
    out = bytearray()
    acc = nbits = 0
    size = min_code_size + 1
    nxt = eoi + 1
    table: dict[int, int] = {}

    acc, nbits = clear, size
    if not indices:
        acc |= eoi << nbits
        nbits += size
    else:
        it = iter(indices)
        w = next(it)
        for b in it:
            key = (w << 8) | b
            c = table.get(key)
            if c is not None:
                w = c
                continue
            acc |= w << nbits
            nbits += size
            while nbits >= 8:
                out.append(acc & 0xFF)
                acc >>= 8
                nbits -= 8
            if nxt < 4096:
                table[key] = nxt
                if nxt == (1 << size) and size < 12:
                    size += 1
                nxt += 1
            else:
                acc |= clear << nbits
                nbits += size
                table = {}
                size = min_code_size + 1
                nxt = eoi + 1
            w = b
        acc |= w << nbits
        nbits += size
        acc |= eoi << nbits
        nbits += size
    while nbits > 0:
        out.append(acc & 0xFF)
        acc >>= 8
        nbits -= 8
    return bytes(out)


def _sub_blocks(data: bytes) -> bytes:
    parts = bytearray()
    for k in range(0, len(data), 255):
        chunk = data[k:k + 255]
        parts.append(len(chunk))
        parts += chunk
    parts.append(0)
    return bytes(parts)


def encode_gif(frames, delay_cs: int, palette: np.ndarray | None = None, loop: int = 0) -> bytes:
    """Encode palette-index frames (each (H, W) uint8) as an animated GIF."""
    frames = [np.ascontiguousarray(f, dtype=np.uint8) for f in frames]
    if not frames:
        raise ValueError("a GIF needs at least one frame")
    height, width = frames[0].shape
    if any(f.shape != (height, width) for f in frames):
        raise ValueError("all frames must share one size")
    pal = cube_palette() if palette is None else np.asarray(palette, dtype=np.uint8)
    out = bytearray(b"GIF89a")
    out += struct.pack("<HHBBB", width, height, 0xF7, 0, 0)
    out += pal.tobytes()
    out += b"\x21\xFF\x0BNETSCAPE2.0\x03\x01" + struct.pack("<H", loop) + b"\x00"
    prev = None
    for f in frames:
        if prev is None:
            x0, y0, sub = 0, 0, f
        else:
            changed = f != prev
            if changed.any():
                rows = np.flatnonzero(changed.any(axis=1))
                cols = np.flatnonzero(changed.any(axis=0))
                y0, x0 = int(rows[0]), int(cols[0])
                sub = f[y0:rows[-1] + 1, x0:cols[-1] + 1]
            else:
                x0, y0, sub = 0, 0, f[:1, :1]
        prev = f
        out += b"\x21\xF9\x04" + struct.pack("<BHBB", 0x04, delay_cs, 0, 0)
        out += b"\x2C" + struct.pack("<HHHHB", x0, y0, sub.shape[1], sub.shape[0], 0)
        out.append(MIN_CODE_SIZE)
        out += _sub_blocks(lzw_encode(np.ascontiguousarray(sub).tobytes()))
    out.append(0x3B)
    return bytes(out)
