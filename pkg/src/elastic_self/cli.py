"""Command-line front end.

Exit codes: 0 success, 1 unreadable or unparsable input, 2 invalid input,
3 numeric failure at run time.

Output files given as relative paths, and default output files, go to
``$ELASTIC_SELF_OUTPUT_DIR`` when it is set. Without it, CSV goes to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import analysis, evolution
from .game import GameError, GameParseError, load_game, paper_pd
from .identity import IdentityError, load_profile, mutual_profile, transform_game

OUTPUT_DIR_ENV = "ELASTIC_SELF_OUTPUT_DIR"


class InputError(Exception):
    """Input could not be read or parsed (exit 1)."""


def _game(args, default_pd: bool = False):
    if args.pd and args.game:
        raise GameError("give either --pd or --game, not both")
    if args.pd or (default_pd and not args.game):
        return paper_pd()
    if not args.game:
        raise GameError("a game is required: pass --pd or --game PATH")
    try:
        return load_game(args.game)
    except OSError as exc:
        raise InputError(f"{args.game}: {exc.strerror or exc}") from None
    except GameParseError as exc:
        raise InputError(f"{args.game}: {exc}") from None
    except GameError as exc:
        raise GameError(f"{args.game}: {exc}") from None


def _out_path(path: str | None, default_name: str) -> Path | None:
    base = os.environ.get(OUTPUT_DIR_ENV)
    if path is None:
        return Path(base) / default_name if base else None
    p = Path(path)
    return Path(base) / p if base and not p.is_absolute() else p


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_analyze(args) -> int:
    game = _game(args)
    reports = [analysis.analyze(game, "raw game")]
    profile = resolver = None
    if args.identity:
        try:
            profile, resolver = load_profile(args.identity, game)
        except OSError as exc:
            raise InputError(f"{args.identity}: {exc.strerror or exc}") from None
        except GameParseError as exc:
            raise InputError(f"{args.identity}: {exc}") from None
        if args.gamma is not None:
            profile = {p: type(s)(s.owner, s.identity_entries, args.gamma) for p, s in profile.items()}
    elif args.mutual:
        if args.gamma is None:
            raise GameError("--mutual needs --gamma")
        profile = mutual_profile(game, args.gamma, args.distance)
    elif args.gamma is not None:
        raise GameError("--gamma needs --mutual or --identity")
    if profile is not None:
        title = "transformed game" + (f" (gamma={analysis.fmt(args.gamma)})" if args.gamma is not None else "")
        reports.append(analysis.analyze(transform_game(game, profile, resolver), title))
    if args.json:
        sys.stdout.write(json.dumps([r.to_dict() for r in reports], indent=2) + "\n")
    else:
        sys.stdout.write("\n".join(r.render() for r in reports))
    return 0


def cmd_sweep(args) -> int:
    game = _game(args)
    player = args.player or game.players[0]
    result = analysis.gamma_sweep(game, player, args.distance, args.grid, args.tolerance)
    path = _out_path(args.out, "sweep.csv")
    _emit(result.to_csv(), path)
    if path is not None:
        for c in result.crossovers:
            print(f"crossover {c.actions[0]},{c.actions[1]} gamma*={analysis.fmt(c.gamma)}")
        if not result.crossovers:
            print("no crossovers")
    return 0


def _parse_mix(text: str) -> tuple[tuple[float, float], ...]:
    try:
        pairs = [part.split(":") for part in text.split(",")]
        return tuple((float(g), float(f)) for g, f in pairs)
    except ValueError:
        raise GameError(f"--mix {text!r}: expected gamma:fraction[,gamma:fraction...]") from None


def _config(args, game) -> evolution.EvolveConfig:
    init = getattr(args, "init", None)
    if init is None:
        init = "mix" if getattr(args, "mix", None) else "point"
    return evolution.EvolveConfig(
        game=game,
        pop_size=args.pop,
        generations=args.gens,
        init=init,
        gamma=getattr(args, "gamma", None) or 0.0,
        mix=_parse_mix(args.mix) if getattr(args, "mix", None) else (),
        pairing=args.pairing,
        assortment=args.assortment,
        update=args.update,
        mutation_rate=args.mutation_rate,
        mutation_step=args.mutation_step,
        distance=args.distance,
        seed=args.seed,
    )


def cmd_evolve(args) -> int:
    game = _game(args, default_pd=True)
    traj = evolution.run(_config(args, game))
    path = _out_path(args.out, "evolve.csv")
    _emit(traj.to_csv(), path)
    last = traj.records[-1]
    line = (f"generations={len(traj.records)} final_coop_freq={analysis.fmt(last.coop_freq)} "
            f"final_mean_gamma={analysis.fmt(traj.final.gammas.mean())}")
    print(line, file=sys.stdout if path is not None else sys.stderr)
    return 0


def cmd_invade(args) -> int:
    game = _game(args, default_pd=True)
    config = _config(args, game)
    result = evolution.invasion_experiment(args.resident_gamma, args.invader_gamma, args.fraction, config)
    path = _out_path(args.out, "invade.csv")
    if path is None:
        sys.stdout.write(result.trajectory.to_csv())
        sys.stderr.write(result.summary())
    else:
        _emit(result.trajectory.to_csv(), path)
        _emit(result.summary(), path.with_suffix(".summary.txt"))
        sys.stdout.write(result.summary())
    return 0


def _add_game_opts(p):
    p.add_argument("--pd", action="store_true", help="use the built-in dilemma (6, 0, 10, 1)")
    p.add_argument("--game", metavar="PATH", help="game file (YAML)")


def _add_evolve_opts(p):
    p.add_argument("--pop", type=int, default=100, help="population size")
    p.add_argument("--gens", type=int, default=200, help="generations")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pairing", choices=evolution.PAIRINGS, default="random")
    p.add_argument("--assortment", type=float, default=0.0,
                   help="chance of pairing with the closest-gamma partner (assortative pairing)")
    p.add_argument("--update", choices=evolution.UPDATES, default="roulette")
    p.add_argument("--mutation-rate", type=float, default=0.0)
    p.add_argument("--mutation-step", type=float, default=0.05)
    p.add_argument("--distance", type=float, default=1.0, help="distance at which partners are identified with")
    p.add_argument("--out", metavar="PATH", help="CSV output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elastic-self",
        description="Derived-utility analysis and evolutionary experiments for normal-form games.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="Nash, dominance, Pareto and altruist report")
    _add_game_opts(p)
    p.add_argument("--identity", metavar="PATH", help="identity profile (YAML)")
    p.add_argument("--gamma", type=float, help="attenuation for --mutual, or override for --identity")
    p.add_argument("--mutual", action="store_true", help="every player identifies with every other")
    p.add_argument("--distance", type=float, default=1.0)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="expected utility per action over a gamma grid")
    _add_game_opts(p)
    p.add_argument("--player")
    p.add_argument("--grid", default="0:1:0.01", help="start:stop:step")
    p.add_argument("--distance", type=float, default=1.0)
    p.add_argument("--tolerance", type=float, default=1e-12, help="crossover bisection tolerance")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("evolve", help="evolutionary run")
    _add_game_opts(p)
    p.add_argument("--gamma", type=float, help="initial gamma for every agent")
    p.add_argument("--init", choices=evolution.INITS)
    p.add_argument("--mix", help="gamma:fraction,... initial mixture")
    _add_evolve_opts(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("invade", help="resident population seeded with invaders")
    _add_game_opts(p)
    p.add_argument("--resident-gamma", type=float, required=True)
    p.add_argument("--invader-gamma", type=float, required=True)
    p.add_argument("--fraction", type=float, required=True, help="initial invader fraction")
    _add_evolve_opts(p)
    p.set_defaults(func=cmd_invade)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except evolution.FitnessAuditError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except (GameError, IdentityError, evolution.EvolutionError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
