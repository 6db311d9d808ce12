from __future__ import annotations

import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fusionlink.cli import load_group  # noqa: E402
from fusionlink.fusion import FusionSystem  # noqa: E402
from fusionlink.groups import sylow_subgroup  # noqa: E402
from fusionlink.linking import build_linking_system  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "data"


@functools.lru_cache(maxsize=None)
def group(name: str):
    return load_group(DATA / f"{name}.json")


@functools.lru_cache(maxsize=None)
def fusion(name: str, p: int = 2) -> FusionSystem:
    G = group(name)
    return FusionSystem(G, sylow_subgroup(G, p), p)


@functools.lru_cache(maxsize=None)
def linking(name: str, p: int = 2):
    return build_linking_system(fusion(name, p))


@pytest.fixture
def data_dir() -> Path:
    return DATA


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
