"""
Shared fixtures: the toy design, bundled designs and the generated corpus
"""

import sys
import os
from pathlib import Path

import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.hierarchy.tree import build_hierarchy
from src.instrument.allocation import allocate_counters
from src.instrument.probe_plan import extract_signals
from src.manifest.generator import generate_manifest
from src.manifest.parser import load_manifest

DESIGNS = Path(__file__).resolve().parents[1] / "designs"

CORPUS_SEEDS = range(20)
RUN_SEEDS = range(5)


@pytest.fixture
def designs_dir() -> Path:
    return DESIGNS


@pytest.fixture
def toy_path() -> str:
    return str(DESIGNS / "toy.json")


@pytest.fixture
def toy_text() -> str:
    return (DESIGNS / "toy.json").read_text(encoding="utf-8")


@pytest.fixture
def toy():
    return load_manifest(str(DESIGNS / "toy.json"))


@pytest.fixture
def toy_tree(toy):
    return build_hierarchy(toy)


@pytest.fixture
def toy_allocation(toy_tree):
    return allocate_counters(extract_signals(toy_tree), toy_tree)


@pytest.fixture(scope="session")
def corpus():
    return [generate_manifest(seed) for seed in CORPUS_SEEDS]


@pytest.fixture
def no_config(monkeypatch):
    """Keep PROBE_FORGE_* settings of the caller's shell out of the run"""
    monkeypatch.delenv("PROBE_FORGE_CONFIG", raising=False)
    monkeypatch.delenv("PROBE_FORGE_WORKSPACE", raising=False)
