import json

import pytest

from mocap2d.errors import EmptyLibrary, MissingTagsFile
from mocap2d.library import MotionEntry, MotionLibrary, index_library, search, tokenize


def test_tokenize():
    assert tokenize("Wave, hello-WORLD  42") == {"wave", "hello", "world", "42"}
    assert tokenize("  ") == set()


def test_index_library(library_dir):
    lib = index_library(library_dir)
    assert sorted(e.id for e in lib.entries) == ["idle", "jump", "run", "walk", "wave"]
    assert lib.warnings == []
    walk = lib.entry("walk")
    assert walk.joint_count == 31
    assert walk.duration == pytest.approx(60 / 30, abs=1e-4)  # frame time stored to 6 decimals
    assert "walk" in lib.tag_index["walk"]


def test_preset_queries_rank_first(library_dir):
    lib = index_library(library_dir)
    for kind in ("idle", "wave", "walk", "run", "jump"):
        (top, score), *_ = search(lib, kind, k=3)
        assert top.id == kind and score == 1.0


def test_partial_overlap_score(library_dir):
    lib = index_library(library_dir)
    [(top, score)] = search(lib, "wave zebra", k=1)
    assert top.id == "wave" and score == 0.5
    assert search(lib, "zebra") == []


def test_tie_break_duration_then_id():
    entries = [MotionEntry("b", "b.bvh", ("x",), 2.0, 1), MotionEntry("a", "a.bvh", ("x",), 2.0, 1),
               MotionEntry("c", "c.bvh", ("x",), 1.0, 1)]
    lib = MotionLibrary(entries)
    assert [e.id for e, _ in search(lib, "x", k=3)] == ["c", "a", "b"]


def test_custom_scorer(library_dir):
    lib = index_library(library_dir)
    hits = search(lib, "anything", k=5, scorer=lambda q, e: 1.0 if e.id == "run" else 0.0)
    assert [e.id for e, _ in hits] == ["run"]


def test_bad_k(library_dir):
    with pytest.raises(ValueError):
        search(index_library(library_dir), "walk", k=0)


def test_broken_file_becomes_warning(library_dir):
    (library_dir / "broken.bvh").write_text("HIERARCHY\nROOT x\n")
    tags = json.loads((library_dir / "tags.json").read_text())
    tags["broken.bvh"] = ["junk"]
    tags["absent.bvh"] = ["ghost"]
    (library_dir / "tags.json").write_text(json.dumps(tags))
    lib = index_library(library_dir)
    assert len(lib.entries) == 5
    assert len(lib.warnings) == 2
    assert any("broken.bvh" in w for w in lib.warnings)


def test_missing_tags_file(library_dir):
    (library_dir / "tags.json").unlink()
    with pytest.raises(MissingTagsFile):
        index_library(library_dir)


def test_explicit_tags_path(library_dir, tmp_path_factory):
    other = tmp_path_factory.mktemp("tags") / "mine.json"
    other.write_text(json.dumps({"run.bvh": ["sprint"]}))
    lib = index_library(library_dir, tags_file=other)
    assert [e.id for e in lib.entries] == ["run"]


def test_empty_library(tmp_path):
    with pytest.raises(EmptyLibrary):
        index_library(tmp_path)
    (tmp_path / "tags.json").write_text(json.dumps({"nothing.bvh": ["x"]}))
    with pytest.raises(EmptyLibrary) as err:
        index_library(tmp_path)
    assert err.value.warnings


# -- tabulated vectors -----------------------------------------------------

def test_five_presets_five_entries(library_dir):
    assert len(index_library(library_dir).entries) == 5


def test_one_corrupt_among_three(tmp_path):
    from mocap2d import synth
    from mocap2d.bvh import write_bvh

    write_bvh(synth.humanoid_bvh("walk", 5), tmp_path / "a.bvh")
    write_bvh(synth.humanoid_bvh("run", 5), tmp_path / "b.bvh")
    (tmp_path / "c.bvh").write_text("garbage")
    (tmp_path / "tags.json").write_text(json.dumps({"a.bvh": ["x"], "b.bvh": ["y"], "c.bvh": ["z"]}))
    lib = index_library(tmp_path)
    assert len(lib.entries) == 2 and len(lib.warnings) == 1


def test_query_vectors(library_dir):
    lib = index_library(library_dir)
    (top, score), = search(lib, "waving", k=1)
    assert top.id == "wave" and score == 1.0
    hits = search(lib, "character waving hello", k=5)
    assert hits[0][0].id == "wave" and hits[0][1] == pytest.approx(1 / 3)
    assert "walk" not in [e.id for e, _ in hits]
    assert search(lib, "zzz") == []
