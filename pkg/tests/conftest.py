"""Shared fixtures: preset configurations and solved games."""

from __future__ import annotations

from dataclasses import replace

import pytest

import honeygame as hg

# Published utility tables for the three stage classes (severity 5.9,
# uniform cost 3); rows no_op + exploits, columns no_mitigation + patches.
TABLE_SET_1 = [
    [0.0, -3.0, -3.0, -3.0],
    [-5.9, 2.9, -8.9, -8.9],
    [-5.9, -8.9, 2.9, -8.9],
    [-5.9, -8.9, -8.9, 2.9],
]
TABLE_SET_2 = [
    [0.0, -3.0, -3.0],
    [-5.9, 2.9, -8.9],
    [-5.9, -8.9, 2.9],
]
TABLE_SET_3 = [
    [0.0, -3.0],
    [-5.9, 2.9],
]


@pytest.fixture(scope="session")
def expert_config() -> hg.ScenarioConfig:
    return hg.load_preset("paper_expert_uniform")


@pytest.fixture(scope="session")
def tuned_config() -> hg.ScenarioConfig:
    return hg.load_preset("paper_tuned_uniform")


@pytest.fixture(scope="session")
def random_config() -> hg.ScenarioConfig:
    return hg.load_preset("paper_random_uniform")


@pytest.fixture(scope="session")
def expert_game(expert_config) -> hg.MarkovGame:
    """Expert transitions, uniform costs, free order, gamma 0.95."""
    return hg.build_engagement_game(expert_config)


@pytest.fixture(scope="session")
def expert_game_g0(expert_config) -> hg.MarkovGame:
    return hg.build_engagement_game(replace(expert_config, gamma=0.0))


@pytest.fixture(scope="session")
def expert_game_fixed(expert_config) -> hg.MarkovGame:
    return hg.build_engagement_game(replace(expert_config, attacker_order="fixed"))


@pytest.fixture(scope="session")
def tuned_game(tuned_config) -> hg.MarkovGame:
    return hg.build_engagement_game(tuned_config)


@pytest.fixture(scope="session")
def opt_expert(expert_game) -> hg.MaximinSolver:
    return hg.MaximinSolver().fit(expert_game)


@pytest.fixture(scope="session")
def opt_expert_g0(expert_game_g0) -> hg.MaximinSolver:
    return hg.MaximinSolver().fit(expert_game_g0)
