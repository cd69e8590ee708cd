"""Finite normal-form games with real-valued payoffs.

A :class:`Game` stores one payoff vector per joint outcome as a dense array of
shape ``(*n_actions, n_players)``. Outcomes are tuples of action indices in
player order; players are referenced by their string identifiers and actions
by their labels at the API surface.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np
import yaml

Outcome = tuple[int, ...]


class GameError(ValueError):
    """A game (or something built from one) violates its invariants."""


class GameParseError(GameError):
    """Game text could not be parsed. Carries 1-based line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


@dataclass(frozen=True, eq=False)
class Game:
    players: tuple[str, ...]
    actions: tuple[tuple[str, ...], ...]
    payoffs: np.ndarray

    def __post_init__(self):
        self.payoffs.setflags(write=False)

    @property
    def n_players(self) -> int:
        return len(self.players)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.actions)

    def player_index(self, player: str) -> int:
        try:
            return self.players.index(player)
        except ValueError:
            raise GameError(f"unknown player {player!r}") from None

    def action_index(self, player: str, action: str) -> int:
        p = self.player_index(player)
        try:
            return self.actions[p].index(action)
        except ValueError:
            raise GameError(f"unknown action {action!r} for player {player!r}") from None

    def outcomes(self) -> Iterator[Outcome]:
        """All joint outcomes, row-major over players in declared order."""
        return itertools.product(*(range(n) for n in self.shape))

    def outcome_of(self, labels: Sequence[str]) -> Outcome:
        if len(labels) != self.n_players:
            raise GameError(f"outcome {list(labels)} has {len(labels)} actions, expected {self.n_players}")
        return tuple(self.action_index(p, a) for p, a in zip(self.players, labels))

    def labels_of(self, outcome: Outcome) -> tuple[str, ...]:
        self.check_outcome(outcome)
        return tuple(acts[i] for acts, i in zip(self.actions, outcome))

    def outcome_name(self, outcome: Outcome) -> str:
        labels = self.labels_of(outcome)
        if all(len(a) == 1 for a in labels):
            return "".join(labels)
        return ",".join(labels)

    def check_outcome(self, outcome: Outcome) -> None:
        if len(outcome) != self.n_players:
            raise GameError(f"outcome {tuple(outcome)} has {len(outcome)} entries, expected {self.n_players}")
        for p, (i, n) in enumerate(zip(outcome, self.shape)):
            if not 0 <= i < n:
                raise GameError(f"outcome {tuple(outcome)}: index {i} out of range for player {self.players[p]!r}")

    @property
    def scale(self) -> float:
        """Largest absolute payoff, floored at 1 for use in tie tolerances."""
        m = float(np.max(np.abs(self.payoffs))) if self.payoffs.size else 0.0
        return m if m > 0 else 1.0

    def with_payoffs(self, payoffs: np.ndarray) -> Game:
        return make_game(self.players, self.actions, payoffs)

    def __eq__(self, other):
        if not isinstance(other, Game):
            return NotImplemented
        return (
            self.players == other.players
            and self.actions == other.actions
            and np.array_equal(self.payoffs, other.payoffs)
        )

    def __hash__(self):
        return hash((self.players, self.actions, self.payoffs.tobytes()))

    def __repr__(self):
        return f"Game(players={self.players}, actions={self.actions})"


def _check_labels(players: Sequence[str], actions: Sequence[Sequence[str]]):
    if len(players) < 1:
        raise GameError("a game needs at least one player")
    if len(set(players)) != len(players):
        dup = next(p for p in players if list(players).count(p) > 1)
        raise GameError(f"duplicate player {dup!r}")
    if len(actions) != len(players):
        raise GameError(f"{len(players)} players but {len(actions)} action lists")
    for p, acts in zip(players, actions):
        if len(acts) < 1:
            raise GameError(f"player {p!r} has no actions")
        if len(set(acts)) != len(acts):
            dup = next(a for a in acts if list(acts).count(a) > 1)
            raise GameError(f"duplicate action {dup!r} for player {p!r}")


def make_game(players, actions, payoffs) -> Game:
    """Build a validated game.

    ``actions`` is either a list of per-player action lists or a mapping from
    player to action list. ``payoffs`` is either an array-like of shape
    ``(*n_actions, n_players)`` or a mapping from outcome (a tuple of action
    labels or of indices) to a payoff vector.
    """
    players = tuple(str(p) for p in players)
    if isinstance(actions, Mapping):
        missing = [p for p in players if p not in actions]
        if missing:
            raise GameError(f"no actions given for player {missing[0]!r}")
        extra = [p for p in actions if p not in players]
        if extra:
            raise GameError(f"actions given for unknown player {extra[0]!r}")
        actions = [actions[p] for p in players]
    actions = tuple(tuple(str(a) for a in acts) for acts in actions)
    _check_labels(players, actions)
    shape = tuple(len(a) for a in actions)
    n = len(players)

    if isinstance(payoffs, Mapping):
        table = np.full(shape + (n,), np.nan)
        seen = set()
        for key, values in payoffs.items():
            key = tuple(key)
            if len(key) != n:
                raise GameError(f"outcome {key} has {len(key)} entries, expected {n}")
            idx = []
            for p, (k, acts) in enumerate(zip(key, actions)):
                if isinstance(k, (int, np.integer)) and not isinstance(k, bool):
                    if not 0 <= k < len(acts):
                        raise GameError(f"outcome {key}: index {k} out of range for player {players[p]!r}")
                    idx.append(int(k))
                elif k in acts:
                    idx.append(acts.index(k))
                else:
                    raise GameError(f"outcome {key}: unknown action {k!r} for player {players[p]!r}")
            idx = tuple(idx)
            if idx in seen:
                raise GameError(f"duplicate outcome {key}")
            seen.add(idx)
            vec = _payoff_vector(values, n, key)
            table[idx] = vec
        if len(seen) != math.prod(shape):
            gap = next(o for o in itertools.product(*(range(s) for s in shape)) if o not in seen)
            labels = tuple(acts[i] for acts, i in zip(actions, gap))
            raise GameError(f"missing outcome {labels}")
    else:
        try:
            table = np.array(payoffs, dtype=float)
        except (TypeError, ValueError) as exc:
            raise GameError(f"payoffs are not a numeric array: {exc}") from None
        if table.shape != shape + (n,):
            raise GameError(f"payoff array has shape {table.shape}, expected {shape + (n,)}")
        bad = np.argwhere(~np.isfinite(table))
        if len(bad):
            *o, p = bad[0]
            labels = tuple(acts[i] for acts, i in zip(actions, o))
            raise GameError(f"non-finite payoff at outcome {labels}, player {players[p]!r}")
        table = table.copy()
    return Game(players, actions, table)


def _payoff_vector(values, n: int, where) -> np.ndarray:
    if isinstance(values, (str, bytes)) or not isinstance(values, Sequence | np.ndarray):
        raise GameError(f"outcome {where}: payoff values must be a list of {n} numbers")
    if len(values) != n:
        raise GameError(f"outcome {where}: {len(values)} payoff values, expected {n}")
    vec = np.empty(n)
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float, np.integer, np.floating)):
            raise GameError(f"outcome {where}: payoff {v!r} is not a number")
        if not math.isfinite(v):
            raise GameError(f"outcome {where}: non-finite payoff {v!r}")
        vec[i] = float(v)
    return vec


def prisoners_dilemma(reward: float, sucker: float, temptation: float, punishment: float) -> Game:
    """Symmetric two-player game with actions ``[C, D]``.

    No ordering between the four values is enforced.
    """
    r, s, t, p = (float(x) for x in (reward, sucker, temptation, punishment))
    table = [
        [[r, r], [s, t]],
        [[t, s], [p, p]],
    ]
    return make_game(["A", "B"], [["C", "D"], ["C", "D"]], table)


def paper_pd() -> Game:
    """The reference dilemma: CC=(6,6), CD=(0,10), DC=(10,0), DD=(1,1)."""
    return prisoners_dilemma(6, 0, 10, 1)


def payoff(game: Game, outcome: Outcome, player: str) -> float:
    game.check_outcome(outcome)
    return float(game.payoffs[tuple(outcome) + (game.player_index(player),)])


# --- text format -----------------------------------------------------------


def game_to_dict(game: Game) -> dict:
    return {
        "players": list(game.players),
        "actions": {p: list(a) for p, a in zip(game.players, game.actions)},
        "payoffs": [
            {"outcome": list(game.labels_of(o)), "values": [float(v) for v in game.payoffs[o]]}
            for o in game.outcomes()
        ],
    }


def serialize_game(game: Game) -> str:
    """Canonical YAML text for ``game``; payoff records in row-major order."""
    lines = ["players: " + _flow(game.players), "actions:"]
    for p, acts in zip(game.players, game.actions):
        lines.append(f"  {_scalar(p)}: {_flow(acts)}")
    lines.append("payoffs:")
    for o in game.outcomes():
        values = ", ".join(_number(v) for v in game.payoffs[o])
        lines.append(f"  - {{outcome: {_flow(game.labels_of(o))}, values: [{values}]}}")
    return "\n".join(lines) + "\n"


def _scalar(s: str) -> str:
    # JSON strings are valid YAML double-quoted scalars
    return json.dumps(s, ensure_ascii=False)


def _flow(items) -> str:
    return "[" + ", ".join(_scalar(str(i)) for i in items) + "]"


def _number(v: float) -> str:
    # YAML 1.1 only reads exponent forms as floats when the mantissa has a dot
    r = repr(float(v))
    mant, e, exp = r.partition("e")
    if e and "." not in mant:
        r = f"{mant}.0e{exp}"
    return r


class _Loader(yaml.SafeLoader):
    pass


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)[eE][-+]?[0-9]+$"),
    list("-+0123456789."),
)


def parse_game(text: str) -> Game:
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise GameParseError(f"syntax error: {exc.problem or exc.context}", line, col) from None
    except yaml.YAMLError as exc:
        raise GameParseError(f"syntax error: {exc}") from None
    return game_from_dict(doc)


def game_from_dict(doc) -> Game:
    if not isinstance(doc, Mapping):
        raise GameError("game document must be a mapping with keys players, actions, payoffs")
    for key in ("players", "actions", "payoffs"):
        if key not in doc:
            raise GameError(f"missing key {key!r}")
    unknown = set(doc) - {"players", "actions", "payoffs", "name", "description"}
    if unknown:
        raise GameError(f"unknown key {sorted(unknown)[0]!r}")
    players = doc["players"]
    if not isinstance(players, list) or not all(isinstance(p, str) for p in players):
        raise GameError("'players' must be a list of strings")
    actions = doc["actions"]
    if not isinstance(actions, Mapping) or not all(
        isinstance(v, list) and all(isinstance(a, str) for a in v) for v in actions.values()
    ):
        raise GameError("'actions' must map each player to a list of strings")
    records = doc["payoffs"]
    if not isinstance(records, list):
        raise GameError("'payoffs' must be a list of records")
    table = {}
    for i, rec in enumerate(records):
        if not isinstance(rec, Mapping) or set(rec) != {"outcome", "values"}:
            raise GameError(f"payoff record {i}: expected keys 'outcome' and 'values'")
        outcome = rec["outcome"]
        if not isinstance(outcome, list) or not all(isinstance(a, str) for a in outcome):
            raise GameError(f"payoff record {i}: 'outcome' must be a list of action labels")
        key = tuple(outcome)
        if key in table:
            raise GameError(f"payoff record {i}: duplicate outcome {key}")
        table[key] = rec["values"]
    return make_game(players, actions, table)


def load_game(path) -> Game:
    with open(path, encoding="utf-8") as fh:
        return parse_game(fh.read())
