"""Game types, validation, and query operations."""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

import honeygame as hg


def test_preset_game_is_valid(expert_game):
    assert hg.validate_game(expert_game) == []


def test_preset_state_layout(expert_game):
    labels = [(s.real_flags, s.hp_flags) for s in expert_game.states[:10]]
    assert labels == [
        (0, 0), (1, 0), (0, 1), (2, 0), (1, 1),
        (0, 2), (3, 0), (2, 1), (1, 2), (0, 3),
    ]
    terminals = [s.id for s in expert_game.states if s.terminal]
    assert terminals == [6, 7, 8, 9, 10]
    assert expert_game.states[10].name == "exit"
    # Exactly four flag terminals; every three-flag label is terminal.
    assert all(s.real_flags + s.hp_flags == 3 for s in expert_game.states[6:10])


def test_available_actions_stage_one(expert_game):
    attacker, defender = expert_game.available_actions(0)
    assert attacker == ("no_op", "exp_1", "exp_2", "exp_3")
    assert defender == ("no_mitigation", "hp_1", "hp_2", "hp_3")


def test_available_actions_stage_three(expert_game):
    attacker, defender = expert_game.available_actions(3)
    assert attacker == ("no_op", "exp_3")
    assert defender == ("no_mitigation", "hp_3")


def test_available_actions_terminal(expert_game):
    attacker, defender = expert_game.available_actions(6)
    assert attacker == ("no_op",)
    assert defender == ("no_mitigation",)


def test_available_actions_unknown_state(expert_game):
    with pytest.raises(hg.UnknownStateError):
        expert_game.available_actions(42)


def test_successor_distribution_patched_exploit(expert_game):
    successors = dict(expert_game.successor_distribution(0, "exp_1", "hp_1"))
    assert successors[1] == pytest.approx(0.4)
    assert successors[2] == pytest.approx(0.4)
    assert successors[10] == pytest.approx(0.2)  # no-flag residual exits
    assert len(successors) == 3


def test_successor_distribution_unpatched_exploit(expert_game):
    successors = dict(expert_game.successor_distribution(0, "exp_1", "no_mitigation"))
    assert successors[1] == pytest.approx(0.75)
    assert successors[10] == pytest.approx(0.25)
    assert len(successors) == 2


def test_successor_distribution_terminal_absorbs(expert_game):
    assert expert_game.successor_distribution(6, "no_op", "no_mitigation") == ((6, 1.0),)


def test_successor_distribution_rejects_foreign_action(expert_game):
    with pytest.raises(hg.UnknownActionError):
        expert_game.successor_distribution(3, "exp_1", "no_mitigation")


def test_distributions_normalized_everywhere(expert_game, tuned_game):
    for game in (expert_game, tuned_game):
        for state in game.states:
            attacker, defender = game.available_actions(state.id)
            for a in attacker:
                for d in defender:
                    entry = game.successor_distribution(state.id, a, d)
                    total = sum(p for _, p in entry)
                    assert total == pytest.approx(1.0, abs=1e-9)
                    assert all(p >= 0 for _, p in entry)


def test_flag_counts_monotone_along_kernel(expert_game):
    # Flag totals strictly increase on flag-yielding transitions and are
    # constant on terminal self-loops; exits are absorbing.
    for (state_id, _, _), entry in expert_game.transitions.kernel.items():
        state = expert_game.state(state_id)
        for successor_id, _ in entry:
            successor = expert_game.state(successor_id)
            if successor_id == state_id or successor.name == "exit":
                continue
            assert (
                successor.real_flags + successor.hp_flags
                == state.real_flags + state.hp_flags + 1
            )


def test_every_state_reaches_a_terminal(expert_game):
    # Under any joint action choice with an exploit played, the kernel
    # carries positive mass toward strictly later stages or exit.
    reach = {s.id for s in expert_game.states if s.terminal}
    changed = True
    while changed:
        changed = False
        for (state_id, _, _), entry in expert_game.transitions.kernel.items():
            if state_id in reach:
                continue
            if any(successor in reach and p > 0 for successor, p in entry):
                reach.add(state_id)
                changed = True
    assert reach == {s.id for s in expert_game.states}


def test_zero_sum_duality(expert_game):
    # The attacker's best response to a mixture equals the negation of the
    # defender's guaranteed value on the negated matrix.
    rng = np.random.default_rng(3)
    for state in expert_game.states:
        matrix = expert_game.utility_matrix(state.id)
        mixture = rng.dirichlet(np.ones(matrix.shape[1]))
        attacker_view = (-(matrix)) @ mixture
        assert (matrix @ mixture).min() == pytest.approx(-attacker_view.max(), abs=1e-12)


def _broken_sum_game(base: hg.MarkovGame) -> hg.MarkovGame:
    kernel = dict(base.transitions.kernel)
    kernel[(0, "exp_1", "hp_1")] = ((1, 0.4), (2, 0.4), (10, 0.1))
    return replace(base, transitions=hg.TransitionModel(kernel))


def test_validate_reports_bad_distribution(expert_game):
    violations = hg.validate_game(_broken_sum_game(expert_game))
    assert len(violations) == 1
    violation = violations[0]
    assert violation.code == "distribution_sum"
    assert violation.state_id == 0
    assert "exp_1" in violation.message and "hp_1" in violation.message


def test_validate_reports_gamma_out_of_range(expert_game):
    violations = hg.validate_game(replace(expert_game, gamma=1.0))
    assert [v.code for v in violations] == ["gamma_range"]
    assert "discount out of range" in violations[0].message


def test_validate_reports_flag_budget(expert_game):
    states = list(expert_game.states)
    states[1] = replace(states[1], real_flags=4)
    broken = replace(expert_game, states=tuple(states))
    assert any(v.code == "flag_budget" for v in hg.validate_game(broken))


def test_validate_reports_anchor_and_duplicates(expert_game):
    sets = dict(expert_game.action_sets)
    sets["set_3"] = hg.ActionSet(("exp_3", "exp_3"), ("no_mitigation", "hp_3"))
    broken = replace(expert_game, action_sets=sets)
    codes = {v.code for v in hg.validate_game(broken)}
    assert "duplicate_action" in codes
    assert "anchor_action" in codes


def test_validate_reports_terminal_not_absorbing(expert_game):
    kernel = dict(expert_game.transitions.kernel)
    kernel[(6, "no_op", "no_mitigation")] = ((0, 1.0),)
    broken = replace(expert_game, transitions=hg.TransitionModel(kernel))
    assert any(v.code == "terminal_absorbing" for v in hg.validate_game(broken))


def test_require_valid_raises_with_report(expert_game):
    from honeygame.games import require_valid

    with pytest.raises(hg.GameError, match="distribution_sum"):
        require_valid(_broken_sum_game(expert_game))
