"""Shared fixtures: the three reference algebras and a binary frame."""

from pathlib import Path

import pytest

from emrfuse import build_algebra, powerset_algebra

MODELS = Path(__file__).resolve().parent.parent / "models"


@pytest.fixture(scope="session")
def free_abc():
    return build_algebra(["a", "b", "c"])


@pytest.fixture(scope="session")
def powerset_abc():
    return powerset_algebra("a", "b", "c")


@pytest.fixture(scope="session")
def overlap_abc():
    return build_algebra(["a", "b", "c"], ["a&b = a&c"])


@pytest.fixture(scope="session")
def binary():
    return build_algebra(["a", "na"], ["a&na = bot", "a|na = top"])


@pytest.fixture(scope="session")
def models_dir():
    return MODELS
