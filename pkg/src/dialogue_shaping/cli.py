"""Command-line entry points.

Subcommands: play (interactive), oracle (exact solution), dialogue
(hint extraction), train (one condition), compare (baseline vs shaped).
"""

from __future__ import annotations

import argparse
from dataclasses import replace
import sys

from . import dialogue as dlg
from .chat import ChatConfig, ChatSession
from .harness import (
    PROFILE_TOTAL_STEPS,
    compare,
    profile_config,
    save_checkpoint,
    save_report,
    train,
    write_metrics_csv,
)
from .kg import load_kg_file, save_kg_file, serialize_kg
from .learner import value_iteration
from .prompts import render_agent_prompt, render_npc_prompt
from .world import (
    InvalidActionError,
    initial_state,
    load_game_spec_file,
    parse_action,
    step,
    valid_actions,
)


def _add_train_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("game", help="game spec JSON file")
    parser.add_argument(
        "--profile",
        choices=sorted(PROFILE_TOTAL_STEPS),
        default="desk",
        help="training scale preset",
    )
    parser.add_argument("--steps", type=int, help="override total environment steps")
    parser.add_argument("--eval-every", type=int, default=450)
    parser.add_argument("--eval-episodes", type=int, default=50)
    parser.add_argument("--seeds", type=int, default=10, help="number of seeds")
    parser.add_argument("--seed", type=int, default=0, help="first seed")
    parser.add_argument("--shaping-bonus", type=float, default=2.0)
    parser.add_argument("--step-cap", type=int, default=75)


def _config_from_args(args) -> "TrainConfig":
    cfg = profile_config(
        args.profile,
        eval_every=args.eval_every,
        eval_episodes=args.eval_episodes,
        n_seeds=args.seeds,
        seed=args.seed,
        shaping_bonus=args.shaping_bonus,
        step_cap=args.step_cap,
    )
    if args.steps is not None:
        cfg = replace(cfg, total_steps=args.steps)
    return cfg


def cmd_play(args) -> int:
    spec = load_game_spec_file(args.game)
    state, obs = initial_state(spec)
    print(obs.room_description)
    total = 0
    while not state.done:
        print(f"[{obs.inventory_text}]")
        try:
            line = input("> ").strip()
        except EOFError:
            print()
            return 0
        if line in ("quit", "exit"):
            return 0
        if line == "actions":
            for action in valid_actions(spec, state):
                print(f"  {action.text(spec)}")
            continue
        try:
            action = parse_action(spec, line)
            state, obs, reward, done = step(spec, state, action, args.step_cap)
        except InvalidActionError as exc:
            print(f"Cannot do that: {exc}")
            continue
        total += reward
        print(obs.last_action_feedback)
        if obs.room_description:
            print(obs.room_description)
        if reward:
            print(f"Reward: {reward} (total {total})")
    print(f"Episode over after {state.steps_taken} steps. Score: {total}")
    return 0


def cmd_oracle(args) -> int:
    spec = load_game_spec_file(args.game)
    optimal_return, path_length = value_iteration(spec, step_cap=args.step_cap)
    print(f"optimal return: {optimal_return:g}")
    print(
        "optimal path length: "
        + (str(path_length) if path_length is not None else "unreachable")
    )
    return 0


def cmd_dialogue(args) -> int:
    spec = load_game_spec_file(args.game)
    if args.questioner == "scripted":
        questioner = dlg.scripted_questioner(spec)
    else:
        session = ChatSession(
            config=ChatConfig.from_env(model=args.model),
            system_prompt=render_agent_prompt(
                spec.goal, target_name=spec.character(spec.goal.target).name
            ),
        )
        questioner = dlg.llm_questioner(session)
    if args.npc == "oracle":
        npc = dlg.oracle_npc(spec)
    else:
        npc_session = ChatSession(
            config=ChatConfig.from_env(model=args.model),
            system_prompt=render_npc_prompt(spec),
        )
        npc = dlg.llm_npc(npc_session)

    transcript = dlg.run_dialogue(spec, questioner, npc, max_rounds=args.max_rounds)
    for number, rnd in enumerate(transcript.rounds, start=1):
        for q, a in zip(rnd.questions, rnd.answers):
            print(f"[{number}] Agent: {q.surface}")
            print(f"[{number}] NPC:   {a.surface}")
    print(f"outcome: {transcript.outcome} after {transcript.rounds_used} rounds")

    if args.output:
        dlg.save_transcript(transcript, args.output)
    if args.emit_kg:
        target = dlg.extract_target_kg(transcript, "structured")
        save_kg_file(target, args.emit_kg)
        print(f"target KG ({len(target.edges)} edges) -> {args.emit_kg}")
        print(serialize_kg(target), end="")
    return 0


def cmd_train(args) -> int:
    spec = load_game_spec_file(args.game)
    cfg = _config_from_args(args)
    target = load_kg_file(args.target_kg) if args.target_kg else None
    all_records = []
    params = None
    for i in range(cfg.n_seeds):
        params, records = train(spec, replace(cfg, seed=cfg.seed + i), target)
        all_records.extend(records)
    write_metrics_csv(all_records, args.output)
    print(f"{len(all_records)} eval records -> {args.output}")
    if args.save_params and params is not None:
        save_checkpoint(args.save_params, params, cfg)
        print(f"final parameters -> {args.save_params}")
    return 0


def cmd_compare(args) -> int:
    spec = load_game_spec_file(args.game)
    cfg = _config_from_args(args)
    target = load_kg_file(args.target_kg)
    report = compare(spec, cfg, target)
    save_report(report, args.output)
    print(
        f"win_pairs={report.win_pairs}"
        f" strict_win_pairs={report.strict_win_pairs}"
        f" auc_win_pairs={report.auc_win_pairs}"
        f" of {len(report.seeds)} seeds -> {args.output}/"
    )
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dialogue-shaping",
        description="Text-adventure RL workbench with NPC-dialogue reward shaping",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("play", help="interactive episode in a game")
    p.add_argument("game")
    p.add_argument("--step-cap", type=int, default=75)
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("oracle", help="print a game's exact optimal solution")
    p.add_argument("game")
    p.add_argument("--step-cap", type=int, default=75)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("dialogue", help="run the hint-extraction dialogue")
    p.add_argument("game")
    p.add_argument("--questioner", choices=("scripted", "llm"), default="scripted")
    p.add_argument("--npc", choices=("oracle", "llm"), default="oracle")
    p.add_argument("--max-rounds", type=int, default=10)
    p.add_argument("--model", default="gpt-3.5-turbo")
    p.add_argument("-o", "--output", help="transcript JSONL path")
    p.add_argument("--emit-kg", help="write the extracted target KG here")
    p.set_defaults(func=cmd_dialogue)

    p = sub.add_parser("train", help="train one condition, write metrics CSV")
    _add_train_options(p)
    p.add_argument("--target-kg", help="target KG file; enables shaping")
    p.add_argument("-o", "--output", required=True, help="metrics CSV path")
    p.add_argument("--save-params", help="write final checkpoint (.npz)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("compare", help="matched-seed baseline vs shaped sweep")
    _add_train_options(p)
    p.add_argument("--target-kg", required=True)
    p.add_argument("-o", "--output", required=True, help="report directory")
    p.set_defaults(func=cmd_compare)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
