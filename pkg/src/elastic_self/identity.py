"""Elastic sense of self and the derived utilities it induces.

An agent identifies with each object in its identity set with weight
``gamma ** distance``. Its utility in an outcome is the weight-normalized
combination of the payoffs those objects receive. The agent itself sits at
distance 0, and ``0 ** 0`` is taken as 1 so that ``gamma = 0`` is exactly the
selfish agent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Sequence

import numpy as np
import yaml

from .game import Game, GameError, GameParseError, Outcome, payoff

# (game, identity object, outcome) -> raw payoff received by that object
PayoffResolver = Callable[[Game, str, Outcome], float]


class IdentityError(ValueError):
    pass


@dataclass(frozen=True)
class SenseOfSelf:
    owner: str
    identity_entries: Mapping[str, float]
    gamma: float

    def __post_init__(self):
        entries = dict(self.identity_entries)
        if not entries:
            raise IdentityError("identity set is empty")
        if entries.get(self.owner) != 0:
            raise IdentityError(f"owner {self.owner!r} must be in its own identity set at distance 0")
        for obj, d in entries.items():
            if not (isinstance(d, (int, float)) and math.isfinite(d) and d >= 0):
                raise IdentityError(f"distance to {obj!r} must be a finite non-negative number, got {d!r}")
        if not (isinstance(self.gamma, (int, float)) and 0 <= self.gamma <= 1):
            raise IdentityError(f"gamma must lie in [0, 1], got {self.gamma!r}")
        object.__setattr__(self, "identity_entries", MappingProxyType({k: float(v) for k, v in entries.items()}))
        object.__setattr__(self, "gamma", float(self.gamma))

    @classmethod
    def selfish(cls, owner: str) -> SenseOfSelf:
        return cls(owner, {owner: 0.0}, 0.0)

    @classmethod
    def including(cls, owner: str, others: Mapping[str, float] | Sequence[str], gamma: float,
                  distance: float = 1.0) -> SenseOfSelf:
        """Owner plus ``others``; a plain sequence puts every other at ``distance``."""
        if not isinstance(others, Mapping):
            others = {o: distance for o in others}
        return cls(owner, {owner: 0.0, **others}, gamma)

    def weights(self) -> dict[str, float]:
        """Normalized identification weights; they sum to 1."""
        z = normalizer(self)
        return {o: identity_weight(self, o) / z for o in self.identity_entries}


def identity_weight(self: SenseOfSelf, obj: str) -> float:
    try:
        d = self.identity_entries[obj]
    except KeyError:
        raise IdentityError(f"{obj!r} is not in the identity set of {self.owner!r}") from None
    if d == 0:
        return 1.0
    return self.gamma ** d


def normalizer(self: SenseOfSelf) -> float:
    return math.fsum(identity_weight(self, o) for o in self.identity_entries)


def player_resolver(game: Game, obj: str, outcome: Outcome) -> float:
    """Default resolver: identity objects are players of the game."""
    return payoff(game, outcome, obj)


@dataclass(frozen=True)
class GroupResolver:
    """Resolves named groups to the mean payoff of their member players.

    Anything that is not a group name is looked up as a player.
    """

    groups: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        for name, members in self.groups.items():
            if not members:
                raise IdentityError(f"group {name!r} has no members")
        object.__setattr__(
            self, "groups", MappingProxyType({k: tuple(v) for k, v in self.groups.items()})
        )

    def __call__(self, game: Game, obj: str, outcome: Outcome) -> float:
        members = self.groups.get(obj)
        if members is None:
            return player_resolver(game, obj, outcome)
        return math.fsum(payoff(game, outcome, m) for m in members) / len(members)


def _resolve(resolver: PayoffResolver, game: Game, obj: str, outcome: Outcome) -> float:
    try:
        return float(resolver(game, obj, outcome))
    except GameError as exc:
        raise IdentityError(f"cannot resolve payoff of identity object {obj!r}: {exc}") from None


def derived_utility(self: SenseOfSelf, game: Game, outcome: Outcome,
                    resolver: PayoffResolver | None = None) -> float:
    game.check_outcome(outcome)
    resolver = resolver or player_resolver
    z = normalizer(self)
    total = 0.0
    for obj in self.identity_entries:
        w = identity_weight(self, obj)
        if w == 0:
            continue
        total += w * _resolve(resolver, game, obj, outcome)
    return total / z


def utility_table(self: SenseOfSelf, game: Game, resolver: PayoffResolver | None = None) -> np.ndarray:
    """Derived utility of ``self.owner`` for every outcome, shaped like the action grid."""
    z = normalizer(self)
    total = np.zeros(game.shape)
    for obj in self.identity_entries:
        w = identity_weight(self, obj)
        if w == 0:
            continue
        if resolver is None and obj in game.players:
            column = game.payoffs[..., game.player_index(obj)]
        else:
            column = np.empty(game.shape)
            for o in game.outcomes():
                column[o] = _resolve(resolver or player_resolver, game, obj, o)
        total = total + w * column
    return total / z


def transform_game(game: Game, profile: Mapping[str, SenseOfSelf],
                   resolver: PayoffResolver | None = None) -> Game:
    """Replace every player's payoffs with their derived utilities.

    Players missing from ``profile`` keep their raw payoffs.
    """
    unknown = [p for p in profile if p not in game.players]
    if unknown:
        raise IdentityError(f"profile names unknown player {unknown[0]!r}")
    table = np.empty_like(game.payoffs)
    for i, p in enumerate(game.players):
        sense = profile.get(p)
        if sense is None:
            table[..., i] = game.payoffs[..., i]
            continue
        if sense.owner != p:
            raise IdentityError(f"profile entry for {p!r} is owned by {sense.owner!r}")
        table[..., i] = utility_table(sense, game, resolver)
    return game.with_payoffs(table)


def mutual_profile(game: Game, gamma: float, distance: float = 1.0) -> dict[str, SenseOfSelf]:
    """Every player identifies with every other player at ``distance``."""
    return {
        p: SenseOfSelf.including(p, [q for q in game.players if q != p], gamma, distance)
        for p in game.players
    }


# --- identity profile files -----------------------------------------------


def profile_from_dict(doc, game: Game | None = None) -> tuple[dict[str, SenseOfSelf], GroupResolver | None]:
    """Read ``{players: {name: {gamma, identifies_with}}, groups: {...}}``.

    Returns the profile and, when groups are declared, a resolver for them.
    """
    if not isinstance(doc, Mapping) or "players" not in doc:
        raise IdentityError("identity profile must be a mapping with a 'players' key")
    unknown = set(doc) - {"players", "groups"}
    if unknown:
        raise IdentityError(f"unknown key {sorted(unknown)[0]!r}")
    groups = doc.get("groups") or {}
    if not isinstance(groups, Mapping) or not all(
        isinstance(v, list) and all(isinstance(m, str) for m in v) for v in groups.values()
    ):
        raise IdentityError("'groups' must map group names to lists of players")
    players = doc["players"] or {}
    if not isinstance(players, Mapping):
        raise IdentityError("'players' must map player names to identity entries")
    profile = {}
    for name, entry in players.items():
        if not isinstance(entry, Mapping):
            raise IdentityError(f"player {name!r}: entry must be a mapping")
        extra = set(entry) - {"gamma", "identifies_with"}
        if extra:
            raise IdentityError(f"player {name!r}: unknown key {sorted(extra)[0]!r}")
        gamma = entry.get("gamma", 0.0)
        if isinstance(gamma, bool) or not isinstance(gamma, (int, float)):
            raise IdentityError(f"player {name!r}: gamma must be a number")
        others = {}
        for i, rec in enumerate(entry.get("identifies_with") or []):
            if not isinstance(rec, Mapping) or set(rec) != {"object", "distance"}:
                raise IdentityError(f"player {name!r}, identifies_with[{i}]: expected keys 'object' and 'distance'")
            obj, d = str(rec["object"]), rec["distance"]
            if obj == name or obj in others:
                raise IdentityError(f"player {name!r}, identifies_with[{i}]: duplicate object {obj!r}")
            if isinstance(d, bool) or not isinstance(d, (int, float)):
                raise IdentityError(f"player {name!r}, identifies_with[{i}]: distance must be a number")
            others[obj] = d
        try:
            profile[str(name)] = SenseOfSelf.including(str(name), others, gamma)
        except IdentityError as exc:
            raise IdentityError(f"player {name!r}: {exc}") from None
    resolver = GroupResolver({k: tuple(v) for k, v in groups.items()}) if groups else None
    if game is not None:
        known = set(game.players) | set(groups)
        for sense in profile.values():
            if sense.owner not in game.players:
                raise IdentityError(f"profile names unknown player {sense.owner!r}")
            for obj in sense.identity_entries:
                if obj not in known:
                    raise IdentityError(f"player {sense.owner!r} identifies with unknown object {obj!r}")
        for name, members in groups.items():
            for m in members:
                if m not in game.players:
                    raise IdentityError(f"group {name!r} has unknown member {m!r}")
    return profile, resolver


def parse_profile(text: str, game: Game | None = None):
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise GameParseError(f"syntax error: {exc.problem}",
                             mark.line + 1 if mark else None, mark.column + 1 if mark else None) from None
    return profile_from_dict(doc, game)


def load_profile(path, game: Game | None = None):
    with open(path, encoding="utf-8") as fh:
        return parse_profile(fh.read(), game)
