"""
Searching a tagged motion library
=================================

Writes the five preset motions plus a tags file to a temporary directory,
indexes it and runs a few keyword queries.
"""

import json
import tempfile
from pathlib import Path

from mocap2d import synth
from mocap2d.bvh import write_bvh
from mocap2d.library import index_library, search

root = Path(tempfile.mkdtemp())
for kind in synth.PRESETS:
    write_bvh(synth.humanoid_bvh(kind, 45), root / f"{kind}.bvh")
(root / "tags.json").write_text(json.dumps({f"{k}.bvh": v for k, v in synth.PRESET_TAGS.items()}))

lib = index_library(root)
for query in ("waving", "locomotion", "jump around"):
    hits = search(lib, query, k=3)
    print(f"{query!r}:", [(e.id, round(s, 2)) for e, s in hits])
