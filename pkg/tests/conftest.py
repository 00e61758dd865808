import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# one "[PASS]/[FAIL] criterion ..." line per acceptance test, filled by
# tests/test_acceptance.py and echoed after the run summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from emospeaker.corpus import generate_synthetic_corpus
from emospeaker.features import make_loader
from emospeaker.protocol import train_population
from emospeaker.sphmm import Topology


@pytest.fixture(scope="session")
def small_topology():
    return Topology(
        acoustic_states=2,
        acoustic_mixtures=2,
        acoustic_dim=16,
        prosodic_states=2,
        prosodic_mixtures=1,
        prosodic_dim=4,
    )


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """3 speakers x 2 emotions, well separated, short utterances."""
    out = tmp_path_factory.mktemp("tiny_corpus")
    return generate_synthetic_corpus(
        seed=101,
        n_speakers=3,
        emotions=("neutral", "angry"),
        separation=3.0,
        out_dir=out,
        frames_range=(18, 24),
    )


@pytest.fixture(scope="session")
def tiny_loader(tiny_corpus):
    return make_loader(tiny_corpus)


@pytest.fixture(scope="session")
def tiny_models(tiny_corpus, tiny_loader, small_topology):
    return train_population(
        tiny_corpus, tiny_loader, "unbiased", small_topology, seed=5, max_iterations=4
    )


@pytest.fixture(scope="session")
def biased_corpus(tmp_path_factory):
    """3 speakers x 2 emotions with a biased:angry sentence set."""
    out = tmp_path_factory.mktemp("biased_corpus")
    return generate_synthetic_corpus(
        seed=202,
        n_speakers=3,
        emotions=("neutral", "angry"),
        separation=1.0,
        out_dir=out,
        frames_range=(18, 24),
        bias_emotions=("angry",),
        bias_boost=2.5,
    )
