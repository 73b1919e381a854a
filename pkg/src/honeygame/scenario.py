"""Honey-patch engagement scenarios.

Builds the three-vulnerability deception engagement as a
:class:`~honeygame.games.MarkovGame`:

* utility matrices composed from per-vulnerability severity and
  honey-patch deployment cost,
* an eleven-state graph - ten flag-count states ``s0..s9`` (pairs of
  real/honeypot flag counts summing to at most three, with the
  three-flag states terminal) plus an absorbing ``exit`` state reached
  when the attacker stops or an exploit attempt yields no flag,
* three transition families: probabilities drawn at random, set by a
  system expert, or tuned from capture-the-flag experiment statistics,
* a line-oriented scenario file format covering both the preset
  engagement and fully explicit custom games.

Scenario file grammar (``#`` starts a comment, keys are lowercase)::

    [profiles]
    <vuln> severity=<float> [cost=<float>]
    [transitions]
    family = expert | tuned | random | explicit
    seed = <int>                      # random family only
    <vuln> = <real_no_hp> <trap> <real_hp>   # explicit family only
    [costs]
    variant = uniform | non-uniform | custom
    [options]
    gamma = <float>
    attacker_order = free | fixed

A file containing a ``[states]`` section instead defines an explicit
game with ``[actions]``, ``[utilities]`` and ``[kernel]`` sections; see
the shipped presets and the README for examples.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .games import (
    NO_MITIGATION,
    NO_OP,
    ActionSet,
    Distribution,
    GameError,
    GameState,
    MarkovGame,
    TransitionModel,
    validate_game,
)

VULNERABILITIES = ("backup", "sampleak", "exploit-market")
DEFAULT_SEVERITY = 5.9
UNIFORM_COST = 3.0
NON_UNIFORM_COSTS = (1.0, 2.0, 3.0)
DEFAULT_GAMMA = 0.95
DEFAULT_RANDOM_SEED = 1

EXIT_NAME = "exit"
TERMINAL_SET = "terminal"

# Flag-count pairs (real, honeypot) in state-id order s0..s9.
CORE_LABELS = (
    (0, 0), (1, 0), (0, 1), (2, 0), (1, 1),
    (0, 2), (3, 0), (2, 1), (1, 2), (0, 3),
)
# Action-set assignment: set_1 at s0 and s2 (a trapped attacker can
# retarget), set_2 at s1/s4/s5, set_3 at s3; three-flag states are terminal.
ACTION_SET_BY_STATE = {0: "set_1", 1: "set_2", 2: "set_1", 3: "set_3", 4: "set_2", 5: "set_2"}
SET_FIRST_VULN = {"set_1": 1, "set_2": 2, "set_3": 3}


class ScenarioError(ValueError):
    """Scenario text that cannot be parsed or fails validation."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


@dataclass(frozen=True)
class VulnerabilityProfile:
    """Severity score and honey-patch deployment cost of one vulnerability."""

    name: str
    severity: float = DEFAULT_SEVERITY
    honeypatch_cost: float = UNIFORM_COST

    def __post_init__(self):
        if self.severity <= 0:
            raise GameError(f"profile {self.name!r}: severity must be positive")
        if self.honeypatch_cost < 0:
            raise GameError(f"profile {self.name!r}: cost must be non-negative")


@dataclass(frozen=True)
class ExploitOutcomes:
    """Outcome probabilities of exploiting one vulnerability.

    ``p_real_no_hp`` applies when the vulnerability is not honey-patched;
    ``p_trap`` and ``p_real_hp`` when it is. Residual mass in either case
    is the no-flag probability.
    """

    p_real_no_hp: float
    p_trap: float
    p_real_hp: float

    def __post_init__(self):
        for field_name in ("p_real_no_hp", "p_trap", "p_real_hp"):
            value = getattr(self, field_name)
            if not 0.0 <= value <= 1.0:
                raise GameError(f"{field_name}={value!r} outside [0, 1]")
        if self.p_trap + self.p_real_hp > 1.0 + 1e-12:
            raise GameError(
                f"p_trap + p_real_hp = {self.p_trap + self.p_real_hp!r} exceeds 1"
            )

    @property
    def p_none_no_hp(self) -> float:
        return 1.0 - self.p_real_no_hp

    @property
    def p_none_hp(self) -> float:
        return 1.0 - self.p_trap - self.p_real_hp


TransitionParams = Mapping[str, ExploitOutcomes]


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to build one engagement game."""

    profiles: tuple[VulnerabilityProfile, ...]
    transition_family: str = "expert"
    seed: int | None = None
    transition_params: tuple[tuple[str, ExploitOutcomes], ...] | None = None
    cost_variant: str = "uniform"
    attacker_order: str = "free"
    gamma: float = DEFAULT_GAMMA


def default_profiles() -> tuple[VulnerabilityProfile, ...]:
    return tuple(VulnerabilityProfile(name) for name in VULNERABILITIES)


def apply_cost_variant(
    profiles: Sequence[VulnerabilityProfile], variant: str
) -> tuple[VulnerabilityProfile, ...]:
    """Set honey-patch costs: all 3 (uniform) or 1/2/3 by position (non-uniform).

    The ``custom`` variant keeps the costs already on the profiles.
    """
    if variant == "custom":
        return tuple(profiles)
    if variant == "uniform":
        costs = (UNIFORM_COST,) * len(profiles)
    elif variant == "non-uniform":
        if len(profiles) != len(NON_UNIFORM_COSTS):
            raise GameError("non-uniform costs are defined for exactly three profiles")
        costs = NON_UNIFORM_COSTS
    else:
        raise GameError(f"unknown cost variant {variant!r}")
    return tuple(
        replace(profile, honeypatch_cost=cost) for profile, cost in zip(profiles, costs)
    )


def expert_transition_model(
    vulnerabilities: Sequence[str] = VULNERABILITIES,
) -> dict[str, ExploitOutcomes]:
    """Expert-set probabilities: the same for every vulnerability."""
    return {name: ExploitOutcomes(0.75, 0.4, 0.4) for name in vulnerabilities}


def tuned_transition_model() -> dict[str, ExploitOutcomes]:
    """Probabilities tuned from capture-the-flag experiment statistics.

    Honey-patched services never yielded a real flag in those
    experiments, so ``p_real_hp`` is 0 throughout.
    """
    return {
        "backup": ExploitOutcomes(1.0, 1.0, 0.0),
        "sampleak": ExploitOutcomes(0.43, 0.5, 0.0),
        "exploit-market": ExploitOutcomes(0.4, 0.6, 0.0),
    }


def random_transition_model(
    seed: int, vulnerabilities: Sequence[str] = VULNERABILITIES
) -> dict[str, ExploitOutcomes]:
    """Strictly positive outcome probabilities drawn per vulnerability.

    Each feasible outcome set gets a symmetric Dirichlet(1) draw, so all
    feasible transitions carry non-zero probability and a fixed seed
    reproduces the same parameters.
    """
    rng = np.random.default_rng(seed)
    params = {}
    for name in vulnerabilities:
        no_hp = rng.dirichlet((1.0, 1.0))  # (real flag, no flag)
        with_hp = rng.dirichlet((1.0, 1.0, 1.0))  # (trap, real flag, no flag)
        params[name] = ExploitOutcomes(
            p_real_no_hp=float(no_hp[0]),
            p_trap=float(with_hp[0]),
            p_real_hp=float(with_hp[1]),
        )
    return params


def resolve_transition_params(config: ScenarioConfig) -> dict[str, ExploitOutcomes]:
    names = tuple(profile.name for profile in config.profiles)
    if config.transition_family == "expert":
        return expert_transition_model(names)
    if config.transition_family == "tuned":
        return tuned_transition_model()
    if config.transition_family == "random":
        seed = DEFAULT_RANDOM_SEED if config.seed is None else config.seed
        return random_transition_model(seed, names)
    if config.transition_family == "explicit":
        if not config.transition_params:
            raise GameError("explicit transition family needs per-vulnerability parameters")
        return dict(config.transition_params)
    raise GameError(f"unknown transition family {config.transition_family!r}")


def build_utility_matrix(
    profiles: Sequence[VulnerabilityProfile],
    available: Sequence[int],
    restrict_attacker: bool = False,
) -> np.ndarray:
    """Defender payoff matrix for the vulnerabilities still in play.

    ``available`` holds 1-based vulnerability positions. Rows are
    attacker actions (``no_op`` first, then one exploit per available
    vulnerability, or only the next one when ``restrict_attacker``);
    columns are defender actions (``no_mitigation`` first, then one
    honey-patch per available vulnerability). An empty ``available`` is
    the terminal case and yields the 1x1 zero matrix.

    Entries: doing nothing against a deployed honey-patch costs its
    deployment cost; an unmitigated exploit costs the vulnerability's
    severity; a honey-patch on the exploited vulnerability earns
    severity minus cost; a honey-patch elsewhere pays its cost on top of
    the severity loss.
    """
    if not available:
        return np.zeros((1, 1))
    attacker_rows = [0] + ([available[0]] if restrict_attacker else list(available))
    defender_cols = [0] + list(available)
    matrix = np.zeros((len(attacker_rows), len(defender_cols)))
    for r, i in enumerate(attacker_rows):
        for c, j in enumerate(defender_cols):
            if i == 0:
                matrix[r, c] = 0.0 if j == 0 else -profiles[j - 1].honeypatch_cost
            elif j == 0:
                matrix[r, c] = -profiles[i - 1].severity
            elif i == j:
                matrix[r, c] = profiles[i - 1].severity - profiles[i - 1].honeypatch_cost
            else:
                matrix[r, c] = -profiles[i - 1].severity - profiles[j - 1].honeypatch_cost
    return matrix


def _build_action_set(available: Sequence[int], restrict_attacker: bool) -> ActionSet:
    exploits = [available[0]] if restrict_attacker else list(available)
    return ActionSet(
        attacker=(NO_OP, *(f"exp_{i}" for i in exploits)),
        defender=(NO_MITIGATION, *(f"hp_{i}" for i in available)),
    )


def build_engagement_game(config: ScenarioConfig) -> MarkovGame:
    """Assemble the preset engagement graph for a scenario configuration.

    States ``s0..s9`` carry the flag-count pairs in canonical order with
    the three-flag states terminal; ``exit`` absorbs the attacker after a
    no-flag outcome or a ``no_op``. Exploiting vulnerability ``i`` moves
    real-flag outcomes one real flag up, trap outcomes one honeypot flag
    up, and sends the residual no-flag mass to ``exit``.
    """
    if len(config.profiles) != 3:
        raise GameError("the preset engagement needs exactly three vulnerability profiles")
    profiles = apply_cost_variant(config.profiles, config.cost_variant)
    params = resolve_transition_params(replace(config, profiles=profiles))
    restrict = config.attacker_order == "fixed"
    if config.attacker_order not in ("free", "fixed"):
        raise GameError(f"unknown attacker order {config.attacker_order!r}")

    index_of = {label: i for i, label in enumerate(CORE_LABELS)}
    exit_id = len(CORE_LABELS)
    states = []
    for state_id, (real, hp) in enumerate(CORE_LABELS):
        terminal = real + hp == 3
        states.append(
            GameState(
                id=state_id,
                real_flags=real,
                hp_flags=hp,
                action_set_id=TERMINAL_SET if terminal else ACTION_SET_BY_STATE[state_id],
                terminal=terminal,
                name=f"s{state_id}",
            )
        )
    states.append(
        GameState(
            id=exit_id, real_flags=0, hp_flags=0,
            action_set_id=TERMINAL_SET, terminal=True, name=EXIT_NAME,
        )
    )

    action_sets: dict[str, ActionSet] = {TERMINAL_SET: ActionSet((NO_OP,), (NO_MITIGATION,))}
    utilities: dict[str, np.ndarray] = {TERMINAL_SET: np.zeros((1, 1))}
    for set_id, first in SET_FIRST_VULN.items():
        available = list(range(first, len(profiles) + 1))
        action_sets[set_id] = _build_action_set(available, restrict)
        utilities[set_id] = build_utility_matrix(profiles, available, restrict)

    kernel: dict[tuple[int, str, str], Distribution] = {}
    for state in states:
        actions = action_sets[state.action_set_id]
        if state.terminal:
            kernel[(state.id, NO_OP, NO_MITIGATION)] = ((state.id, 1.0),)
            continue
        real, hp = state.real_flags, state.hp_flags
        for attacker_action in actions.attacker:
            for defender_action in actions.defender:
                if attacker_action == NO_OP:
                    entry: list[tuple[int, float]] = [(exit_id, 1.0)]
                else:
                    vuln = int(attacker_action.split("_")[1])
                    outcomes = params[profiles[vuln - 1].name]
                    patched = defender_action == f"hp_{vuln}"
                    entry = []
                    if patched:
                        if outcomes.p_real_hp > 0:
                            entry.append((index_of[(real + 1, hp)], outcomes.p_real_hp))
                        if outcomes.p_trap > 0:
                            entry.append((index_of[(real, hp + 1)], outcomes.p_trap))
                        if outcomes.p_none_hp > 0:
                            entry.append((exit_id, outcomes.p_none_hp))
                    else:
                        if outcomes.p_real_no_hp > 0:
                            entry.append((index_of[(real + 1, hp)], outcomes.p_real_no_hp))
                        if outcomes.p_none_no_hp > 0:
                            entry.append((exit_id, outcomes.p_none_no_hp))
                kernel[(state.id, attacker_action, defender_action)] = tuple(entry)

    return MarkovGame(
        states=tuple(states),
        action_sets=action_sets,
        utilities=utilities,
        transitions=TransitionModel(kernel),
        gamma=config.gamma,
    )


# ---------------------------------------------------------------------------
# Scenario file parsing


def _strip(line: str) -> str:
    if "#" in line:
        line = line[: line.index("#")]
    return line.strip()


def _parse_bool(token: str, line_no: int) -> bool:
    if token in ("true", "false"):
        return token == "true"
    raise ScenarioError(f"expected true/false, got {token!r}", line_no)


def _parse_float(token: str, line_no: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ScenarioError(f"expected a number, got {token!r}", line_no) from None


def _key_value(line: str, line_no: int) -> tuple[str, str]:
    if "=" not in line:
        raise ScenarioError(f"expected 'key = value', got {line!r}", line_no)
    key, _, value = line.partition("=")
    return key.strip(), value.strip()


def _parse_fields(tokens: list[str], line_no: int) -> dict[str, str]:
    fields = {}
    for token in tokens:
        if "=" not in token:
            raise ScenarioError(f"expected field=value, got {token!r}", line_no)
        key, _, value = token.partition("=")
        fields[key] = value
    return fields


def _sectionize(text: str) -> dict[str, list[tuple[int, str]]]:
    sections: dict[str, list[tuple[int, str]]] = {}
    current: str | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ScenarioError(f"malformed section header {line!r}", line_no)
            current = line[1:-1].strip()
            sections.setdefault(current, [])
            continue
        if current is None:
            raise ScenarioError(f"content before any section: {line!r}", line_no)
        sections[current].append((line_no, line))
    return sections


def _parse_config(sections: dict[str, list[tuple[int, str]]]) -> ScenarioConfig:
    profiles: list[VulnerabilityProfile] = []
    for line_no, line in sections.get("profiles", []):
        tokens = line.split()
        fields = _parse_fields(tokens[1:], line_no)
        try:
            profiles.append(
                VulnerabilityProfile(
                    name=tokens[0],
                    severity=_parse_float(fields.get("severity", str(DEFAULT_SEVERITY)), line_no),
                    honeypatch_cost=_parse_float(fields.get("cost", str(UNIFORM_COST)), line_no),
                )
            )
        except GameError as exc:
            raise ScenarioError(str(exc), line_no) from None
    if not profiles:
        profiles = list(default_profiles())

    family = "expert"
    seed: int | None = None
    explicit: list[tuple[str, ExploitOutcomes]] = []
    for line_no, line in sections.get("transitions", []):
        key, value = _key_value(line, line_no)
        if key == "family":
            family = value
        elif key == "seed":
            try:
                seed = int(value)
            except ValueError:
                raise ScenarioError(f"seed must be an integer, got {value!r}", line_no) from None
        else:
            numbers = value.split()
            if len(numbers) != 3:
                raise ScenarioError(
                    f"transition row needs three probabilities, got {value!r}", line_no
                )
            try:
                outcomes = ExploitOutcomes(*(_parse_float(n, line_no) for n in numbers))
            except GameError as exc:
                raise ScenarioError(str(exc), line_no) from None
            explicit.append((key, outcomes))

    # Without a [costs] section the profile costs stand as written.
    variant = "custom" if "costs" not in sections else "uniform"
    for line_no, line in sections.get("costs", []):
        key, value = _key_value(line, line_no)
        if key != "variant":
            raise ScenarioError(f"unknown costs key {key!r}", line_no)
        variant = value

    gamma = DEFAULT_GAMMA
    order = "free"
    for line_no, line in sections.get("options", []):
        key, value = _key_value(line, line_no)
        if key == "gamma":
            gamma = _parse_float(value, line_no)
        elif key == "attacker_order":
            order = value
        else:
            raise ScenarioError(f"unknown option {key!r}", line_no)

    try:
        profiles = list(apply_cost_variant(profiles, variant))
    except GameError as exc:
        raise ScenarioError(str(exc)) from None
    return ScenarioConfig(
        profiles=tuple(profiles),
        transition_family=family,
        seed=seed,
        transition_params=tuple(explicit) or None,
        cost_variant=variant,
        attacker_order=order,
        gamma=gamma,
    )


def _parse_explicit_game(sections: dict[str, list[tuple[int, str]]]) -> MarkovGame:
    states: list[GameState] = []
    for line_no, line in sections["states"]:
        tokens = line.split()
        try:
            state_id = int(tokens[0])
        except ValueError:
            raise ScenarioError(f"state id must be an integer, got {tokens[0]!r}", line_no) from None
        fields = _parse_fields(tokens[1:], line_no)
        for required in ("real", "hp", "actions", "terminal"):
            if required not in fields:
                raise ScenarioError(f"state {state_id} is missing field {required!r}", line_no)
        states.append(
            GameState(
                id=state_id,
                real_flags=int(_parse_float(fields["real"], line_no)),
                hp_flags=int(_parse_float(fields["hp"], line_no)),
                action_set_id=fields["actions"],
                terminal=_parse_bool(fields["terminal"], line_no),
                name=fields.get("name", f"s{state_id}"),
            )
        )

    attacker_lists: dict[str, tuple[str, ...]] = {}
    defender_lists: dict[str, tuple[str, ...]] = {}
    for line_no, line in sections.get("actions", []):
        key, value = _key_value(line, line_no)
        if "." not in key:
            raise ScenarioError(f"expected '<set>.attacker' or '<set>.defender', got {key!r}", line_no)
        set_id, _, side = key.partition(".")
        labels = tuple(token.strip() for token in value.split(",") if token.strip())
        if side == "attacker":
            attacker_lists[set_id] = labels
        elif side == "defender":
            defender_lists[set_id] = labels
        else:
            raise ScenarioError(f"unknown action side {side!r}", line_no)
    action_sets = {}
    for set_id in set(attacker_lists) | set(defender_lists):
        if set_id not in attacker_lists or set_id not in defender_lists:
            raise ScenarioError(f"action set {set_id!r} needs both attacker and defender lists")
        action_sets[set_id] = ActionSet(attacker_lists[set_id], defender_lists[set_id])

    utility_rows: dict[str, dict[str, list[float]]] = {}
    for line_no, line in sections.get("utilities", []):
        key, value = _key_value(line, line_no)
        if "." not in key:
            raise ScenarioError(f"expected '<set>.<attacker action>', got {key!r}", line_no)
        set_id, _, action = key.partition(".")
        utility_rows.setdefault(set_id, {})[action] = [
            _parse_float(token, line_no) for token in value.split()
        ]
    utilities = {}
    for set_id, actions in action_sets.items():
        rows = utility_rows.get(set_id, {})
        missing = [a for a in actions.attacker if a not in rows]
        if missing:
            raise ScenarioError(f"action set {set_id!r}: missing utility rows for {missing}")
        try:
            utilities[set_id] = np.array([rows[a] for a in actions.attacker], dtype=float)
        except ValueError:
            raise ScenarioError(f"action set {set_id!r}: ragged utility rows") from None

    kernel: dict[tuple[int, str, str], Distribution] = {}
    for line_no, line in sections.get("kernel", []):
        head, _, value = line.partition("=")
        tokens = head.split()
        if len(tokens) != 3:
            raise ScenarioError(
                f"expected '<state> <attacker> <defender> = ...', got {line!r}", line_no
            )
        try:
            state_id = int(tokens[0])
        except ValueError:
            raise ScenarioError(f"state id must be an integer, got {tokens[0]!r}", line_no) from None
        entry = []
        for pair in value.split():
            if ":" not in pair:
                raise ScenarioError(f"expected successor:probability, got {pair!r}", line_no)
            successor, _, probability = pair.partition(":")
            try:
                entry.append((int(successor), _parse_float(probability, line_no)))
            except ValueError:
                raise ScenarioError(f"bad successor id {successor!r}", line_no) from None
        kernel[(state_id, tokens[1], tokens[2])] = tuple(entry)

    gamma = DEFAULT_GAMMA
    max_flags: int | None = None
    for line_no, line in sections.get("options", []):
        key, value = _key_value(line, line_no)
        if key == "gamma":
            gamma = _parse_float(value, line_no)
        elif key == "max_flags":
            max_flags = None if value == "none" else int(_parse_float(value, line_no))
        else:
            raise ScenarioError(f"unknown option {key!r}", line_no)

    game = MarkovGame(
        states=tuple(sorted(states, key=lambda s: s.id)),
        action_sets=action_sets,
        utilities=utilities,
        transitions=TransitionModel(kernel),
        gamma=gamma,
        max_flags=max_flags,
    )
    violations = validate_game(game)
    if violations:
        raise ScenarioError("; ".join(str(v) for v in violations))
    return game


def parse_scenario_file(text: str) -> ScenarioConfig | MarkovGame:
    """Parse scenario text into a preset config or an explicit game.

    Syntax errors raise :class:`ScenarioError` carrying a line number;
    semantic problems in explicit games surface the full
    :func:`~honeygame.games.validate_game` report.
    """
    sections = _sectionize(text)
    if "states" in sections:
        return _parse_explicit_game(sections)
    return _parse_config(sections)


def serialize_scenario(config: ScenarioConfig) -> str:
    """Render a config as scenario text; inverse of :func:`parse_scenario_file`."""
    lines = ["[profiles]"]
    for profile in config.profiles:
        lines.append(
            f"{profile.name} severity={profile.severity!r} cost={profile.honeypatch_cost!r}"
        )
    lines.append("[transitions]")
    lines.append(f"family = {config.transition_family}")
    if config.seed is not None:
        lines.append(f"seed = {config.seed}")
    for name, outcomes in config.transition_params or ():
        lines.append(
            f"{name} = {outcomes.p_real_no_hp!r} {outcomes.p_trap!r} {outcomes.p_real_hp!r}"
        )
    lines.append("[costs]")
    lines.append(f"variant = {config.cost_variant}")
    lines.append("[options]")
    lines.append(f"gamma = {config.gamma!r}")
    lines.append(f"attacker_order = {config.attacker_order}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Shipped presets

PRESET_NAMES = (
    "paper_random_uniform",
    "paper_expert_uniform",
    "paper_tuned_uniform",
    "paper_random_nonuniform",
    "paper_expert_nonuniform",
    "paper_tuned_nonuniform",
)


def preset_text(name: str) -> str:
    if name not in PRESET_NAMES:
        raise ScenarioError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        )
    resource = importlib.resources.files("honeygame.data").joinpath(f"{name}.scenario")
    return resource.read_text(encoding="utf-8")


def load_preset(name: str) -> ScenarioConfig:
    """Load one of the shipped engagement presets by name."""
    parsed = parse_scenario_file(preset_text(name))
    assert isinstance(parsed, ScenarioConfig)
    return parsed
