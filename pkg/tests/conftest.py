import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from timebar.fixtures import PlantedMoment, make_fixture_video


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture(scope="session")
def cat_video(tmp_path_factory):
    """80 s fixture with a cat from 20 s to 45 s and a dog from 60 s to 70 s."""
    path = tmp_path_factory.mktemp("videos") / "cat80"
    moments = [PlantedMoment("cat", 20, 45), PlantedMoment("dog", 60, 70)]
    return make_fixture_video(path, 80, moments)


@pytest.fixture(scope="session")
def tiny_video(tmp_path_factory):
    path = tmp_path_factory.mktemp("videos") / "tiny"
    return make_fixture_video(path, 24, [PlantedMoment("ball", 8, 16)], width=96, height=54)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
