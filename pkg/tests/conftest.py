import numpy as np
import pytest

from mocap2d import synth

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20241014)


@pytest.fixture(scope="session")
def walk_doc():
    return synth.humanoid_bvh("walk", 61)


@pytest.fixture(scope="session")
def humanoid():
    return synth.humanoid_rig()


@pytest.fixture(scope="session")
def humanoid_map():
    return synth.humanoid_joint_map()


@pytest.fixture
def library_dir(tmp_path):
    """The five preset motions written as BVH files plus a tags file."""
    import json

    from mocap2d.bvh import write_bvh

    frames = {"idle": 90, "wave": 60, "walk": 61, "run": 40, "jump": 45}
    for kind in synth.PRESETS:
        write_bvh(synth.humanoid_bvh(kind, frames[kind]), tmp_path / f"{kind}.bvh")
    (tmp_path / "tags.json").write_text(json.dumps({f"{k}.bvh": v for k, v in synth.PRESET_TAGS.items()}))
    return tmp_path


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
