from __future__ import annotations

import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", parent=settings.get_profile("default"), max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def trained_net():
    from latent_modes.policy import BCConfig, train_bc

    return train_bc(BCConfig()).net


@pytest.fixture(scope="session")
def default_dataset(trained_net):
    from latent_modes.mountain_car import EnvConfig, initial_state_grid
    from latent_modes.rollout import build_dataset

    return build_dataset(trained_net, EnvConfig(), initial_state_grid())


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number])
