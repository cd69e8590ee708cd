"""Expected-utility analysis over the attenuation parameter, plus the usual
pure-strategy solution concepts.

Beliefs are uniform: conditional on its own action, a player treats every
joint action of its opponents as equally likely.

Ties are judged with an absolute tolerance of ``TIE_RTOL * game.scale``. A
deviation only counts as an improvement, and an action only as strictly
better, when it clears that margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

from .game import Game, GameError, Outcome
from .identity import PayoffResolver, SenseOfSelf, utility_table

TIE_RTOL = 1e-12
DEFAULT_SCAN_POINTS = 101


def _tol(game: Game) -> float:
    return TIE_RTOL * game.scale


# --- expected utility -------------------------------------------------------


def expected_utilities(game: Game, sense: SenseOfSelf, player: str | None = None,
                       resolver: PayoffResolver | None = None) -> np.ndarray:
    """Expected derived utility of each of ``player``'s actions, in action order."""
    player = sense.owner if player is None else player
    p = game.player_index(player)
    if sense.owner != player:
        raise GameError(f"sense of self belongs to {sense.owner!r}, not {player!r}")
    table = utility_table(sense, game, resolver)
    others = tuple(i for i in range(game.n_players) if i != p)
    return table.mean(axis=others) if others else table


def expected_utility(game: Game, sense: SenseOfSelf, player: str, action: str,
                     resolver: PayoffResolver | None = None) -> float:
    a = game.action_index(player, action)
    return float(expected_utilities(game, sense, player, resolver)[a])


Distances = Union[float, Mapping[str, float]]


def _sense_at(game: Game, player: str, gamma: float, other_distance: Distances) -> SenseOfSelf:
    if isinstance(other_distance, Mapping):
        return SenseOfSelf.including(player, other_distance, gamma)
    return SenseOfSelf.including(player, [q for q in game.players if q != player], gamma, other_distance)


def expected_utility_curve(game: Game, player: str, other_distance: Distances = 1.0) -> Callable[[float], np.ndarray]:
    """``gamma -> expected utilities`` when ``player`` identifies with the other players.

    ``other_distance`` is one distance for every other player, or a mapping
    from the identified players to their distances.
    """
    game.player_index(player)

    def curve(gamma: float) -> np.ndarray:
        return expected_utilities(game, _sense_at(game, player, gamma, other_distance), player)

    return curve


# --- grids and root finding -------------------------------------------------


def parse_grid(spec) -> np.ndarray:
    """Gamma grid from ``"start:stop:step"`` or an explicit sequence of values.

    A string grid includes ``stop`` when it falls on the grid (to rounding).
    """
    if isinstance(spec, str):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {spec!r}: expected start:stop:step")
        try:
            start, stop, step = (float(x) for x in parts)
        except ValueError:
            raise ValueError(f"grid {spec!r}: non-numeric bound") from None
        if not step > 0 or stop < start:
            raise ValueError(f"grid {spec!r}: need step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        grid = np.round(start + step * np.arange(n), 12)
    else:
        grid = np.asarray(spec, dtype=float)
    if grid.size == 0:
        raise ValueError("empty gamma grid")
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("gamma grid must be strictly increasing")
    if grid[0] < 0 or grid[-1] > 1:
        raise ValueError("gamma grid must lie within [0, 1]")
    return grid


def bisect(f: Callable[[float], float], lo: float, hi: float, tolerance: float) -> float:
    """Root of ``f`` on ``[lo, hi]`` given a sign change between the ends."""
    flo = f(lo)
    if flo == 0:
        return lo
    if f(hi) == 0:
        return hi
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _brackets(values: np.ndarray, tol: float) -> list[tuple[int, int, int]]:
    """Index pairs around each sign change of ``values`` (values within ``tol`` count as 0).

    Returns ``(i, j, direction)`` with direction +1 for a rise through zero.
    """
    out = []
    last = None
    for j, v in enumerate(values):
        s = 0 if abs(v) <= tol else (1 if v > 0 else -1)
        if s == 0:
            continue
        if last is not None and s != last[1]:
            out.append((last[0], j, s))
        last = (j, s)
    return out


@dataclass(frozen=True)
class Crossover:
    """Point where ``E(actions[0]) - E(actions[1])`` changes sign.

    ``direction`` is +1 when the first action overtakes the second as gamma grows.
    ``multiple`` is set when more than one crossing was bracketed.
    """

    actions: tuple[str, str]
    gamma: float
    direction: int
    multiple: bool = False


@dataclass(frozen=True)
class SweepResult:
    player: str
    actions: tuple[str, ...]
    gamma_grid: np.ndarray
    expected_utilities: np.ndarray  # (len(gamma_grid), len(actions))
    crossovers: tuple[Crossover, ...] = ()

    def column(self, action: str) -> np.ndarray:
        return self.expected_utilities[:, self.actions.index(action)]

    def to_csv(self) -> str:
        lines = ["gamma,action,expected_utility"]
        for g, row in zip(self.gamma_grid, self.expected_utilities):
            for a, e in zip(self.actions, row):
                lines.append(f"{fmt(g)},{a},{fmt(e)}")
        for c in self.crossovers:
            sign = "+" if c.direction > 0 else "-"
            lines.append(f"# crossover {c.actions[0]},{c.actions[1]} gamma*={fmt(c.gamma)} direction={sign}")
        if not self.crossovers:
            lines.append("# no crossovers")
        return "\n".join(lines) + "\n"


def fmt(x: float) -> str:
    """Fixed 9-significant-digit rendering used in every CSV."""
    s = f"{float(x):.9g}"
    return "0" if s == "-0" else s


def _crossings(diff: Callable[[float], float], grid: np.ndarray, values: np.ndarray, tol: float,
               tolerance: float, actions: tuple[str, str]) -> list[Crossover]:
    return [
        Crossover(actions, bisect(diff, float(grid[i]), float(grid[j]), tolerance), s)
        for i, j, s in _brackets(values, tol)
    ]


def gamma_sweep(game: Game, player: str, other_distance: Distances = 1.0, grid_spec="0:1:0.01",
                tolerance: float = 1e-12) -> SweepResult:
    """Expected utility of each of ``player``'s actions over a gamma grid.

    Crossovers are detected for every action pair from sign changes on the grid
    and refined by bisection to ``tolerance``.
    """
    grid = parse_grid(grid_spec)
    curve = expected_utility_curve(game, player, other_distance)
    table = np.array([curve(g) for g in grid])
    p = game.player_index(player)
    actions = game.actions[p]
    tol = _tol(game)
    crossovers = []
    for a in range(len(actions)):
        for b in range(a + 1, len(actions)):
            def diff(g, a=a, b=b):
                e = curve(g)
                return float(e[a] - e[b])
            crossovers += _crossings(diff, grid, table[:, a] - table[:, b], tol, tolerance,
                                     (actions[a], actions[b]))
    return SweepResult(player, actions, grid, table, tuple(crossovers))


def crossover_gamma(game: Game, player: str, action_pair: Sequence[str], tolerance: float = 1e-9,
                    other_distance: Distances = 1.0, scan_points: int = DEFAULT_SCAN_POINTS) -> Crossover | None:
    """Smallest gamma in [0, 1] where the two actions' expected utilities cross.

    Returns ``None`` when the difference never changes sign on the scan grid.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    a, b = (game.action_index(player, x) for x in action_pair)
    curve = expected_utility_curve(game, player, other_distance)

    def diff(g):
        e = curve(g)
        return float(e[a] - e[b])

    grid = np.linspace(0.0, 1.0, scan_points)
    values = np.array([diff(g) for g in grid])
    found = _crossings(diff, grid, values, _tol(game), tolerance, tuple(action_pair))
    if not found:
        return None
    first = found[0]
    if len(found) > 1:
        first = Crossover(first.actions, first.gamma, first.direction, multiple=True)
    return first


# --- solution concepts ------------------------------------------------------


def _opponent_axes(game: Game, p: int) -> tuple[int, ...]:
    return tuple(i for i in range(game.n_players) if i != p)


def pure_nash(game: Game) -> list[Outcome]:
    """Outcomes where no player gains more than the tie tolerance by deviating alone.

    Returned in row-major outcome order.
    """
    tol = _tol(game)
    ok = np.ones(game.shape, dtype=bool)
    for p in range(game.n_players):
        own = game.payoffs[..., p]
        best = own.max(axis=p, keepdims=True)
        ok &= own >= best - tol
    return [tuple(int(i) for i in o) for o in np.argwhere(ok)]


def strictly_dominant(game: Game, player: str) -> str | None:
    """The action beating every other action against every opponent profile, if any."""
    p = game.player_index(player)
    own = np.moveaxis(game.payoffs[..., p], p, 0)
    n = own.shape[0]
    if n == 1:
        return None
    tol = _tol(game)
    for a in range(n):
        if all(np.all(own[a] > own[b] + tol) for b in range(n) if b != a):
            return game.actions[p][a]
    return None


def pareto_frontier(game: Game) -> list[Outcome]:
    """Outcomes not Pareto-dominated by any other outcome, row-major order."""
    tol = _tol(game)
    outcomes = list(game.outcomes())
    vecs = game.payoffs.reshape(-1, game.n_players)
    keep = []
    for k, o in enumerate(outcomes):
        v = vecs[k]
        weakly = np.all(vecs >= v - tol, axis=1)
        strictly = np.any(vecs > v + tol, axis=1)
        if not np.any(weakly & strictly):
            keep.append(o)
    return keep


def altruist_attractors(game: Game, player: str) -> list[Outcome]:
    """Outcomes an altruistic ``player`` would favor: those maximizing the other player's payoff."""
    if game.n_players != 2:
        raise GameError("altruist attractors are defined for two-player games")
    p = game.player_index(player)
    other = game.payoffs[..., 1 - p]
    best = other.max()
    return [tuple(int(i) for i in o) for o in np.argwhere(other >= best - _tol(game))]


def nash_threshold(indicator: Callable[[float], bool], lo: float = 0.0, hi: float = 1.0,
                   tolerance: float = 1e-9) -> float:
    """Boundary of a monotone boolean indicator on [lo, hi], with ``indicator(hi)`` true."""
    if indicator(lo) or not indicator(hi):
        raise ValueError("indicator must be false at lo and true at hi")
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if indicator(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# --- reports ----------------------------------------------------------------


@dataclass(frozen=True)
class GameReport:
    game: Game
    nash: tuple[Outcome, ...]
    dominant: dict[str, str | None]
    pareto: tuple[Outcome, ...]
    altruist: dict[str, tuple[Outcome, ...]] = field(default_factory=dict)
    title: str = "game"

    def to_dict(self) -> dict:
        name = self.game.outcome_name
        return {
            "title": self.title,
            "players": list(self.game.players),
            "actions": {p: list(a) for p, a in zip(self.game.players, self.game.actions)},
            "payoffs": {name(o): [float(v) for v in self.game.payoffs[o]] for o in self.game.outcomes()},
            "pure_nash": [name(o) for o in self.nash],
            "strictly_dominant": dict(self.dominant),
            "pareto_frontier": [name(o) for o in self.pareto],
            "altruist_attractors": {p: [name(o) for o in v] for p, v in self.altruist.items()},
        }

    def render(self) -> str:
        name = self.game.outcome_name

        def names(os: Iterable[Outcome]) -> str:
            return "{" + ", ".join(name(o) for o in os) + "}"

        lines = [f"== {self.title} =="]
        for o in self.game.outcomes():
            lines.append(f"  {name(o):>8}: " + ", ".join(fmt(v) for v in self.game.payoffs[o]))
        lines.append(f"pure Nash: {names(self.nash)}")
        for p, a in self.dominant.items():
            lines.append(f"strictly dominant for {p}: {a if a is not None else '-'}")
        lines.append(f"Pareto frontier: {names(self.pareto)}")
        for p, os in self.altruist.items():
            lines.append(f"altruist attractors for {p}: {names(os)}")
        return "\n".join(lines) + "\n"


def analyze(game: Game, title: str = "game") -> GameReport:
    altruist = {}
    if game.n_players == 2:
        altruist = {p: tuple(altruist_attractors(game, p)) for p in game.players}
    return GameReport(
        game=game,
        nash=tuple(pure_nash(game)),
        dominant={p: strictly_dominant(game, p) for p in game.players},
        pareto=tuple(pareto_frontier(game)),
        altruist=altruist,
        title=title,
    )
