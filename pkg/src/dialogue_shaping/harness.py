"""Experiment harness: training runs, seed sweeps, metrics files.

train() interleaves sampled-episode learning with periodic greedy
evaluations; compare() runs baseline and shaped conditions with matched
seeds and reports convergence statistics. Everything downstream (CSV,
summary.json, checkpoints) is deterministic for a fixed config so runs
can be reproduced byte for byte.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field, replace
import json
import os

import numpy as np

# numpy 2 renamed trapz; accept either so both majors work
_trapezoid = getattr(np, "trapezoid", None) or np.trapz

from .kg import KnowledgeGraph, empty_internal_kg, filter_you_edges, update_internal
from .learner import (
    PolicyParams,
    Trajectory,
    TrajectoryStep,
    a2c_update,
    featurize,
    init_params,
    select_action,
)
from .shaping import new_episode, shaping_reward
from .world import GameSpec, Goal, enumerate_actions, initial_state, step, valid_actions

METRICS_HEADER = ("step", "mean_score", "std_score", "condition", "seed")

# Training profiles: "full" is the complete protocol, "desk" a scaled
# down variant that converges in minutes on fixture games.
PROFILE_TOTAL_STEPS = {"full": 100_000, "desk": 20_000}


@dataclass(frozen=True)
class TrainConfig:
    total_steps: int = 100_000
    eval_every: int = 450
    eval_episodes: int = 50
    n_seeds: int = 10
    step_cap: int = 75
    shaping_bonus: float = 2.0
    seed: int = 0
    gamma: float = 0.9
    # 1e-3 lets the value head fit before the policy's argmax settles;
    # greedy evals then never stabilize within the desk budget.
    lr: float = 3e-3
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    feature_dim: int = 256
    hidden_dim: int = 64
    hash_seed: int = 0
    goal_reward_override: int | None = None

    def __post_init__(self) -> None:
        for name in (
            "total_steps",
            "eval_every",
            "eval_episodes",
            "n_seeds",
            "step_cap",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.eval_every > self.total_steps:
            raise ValueError("eval_every must not exceed total_steps")
        if self.shaping_bonus < 0:
            raise ValueError("shaping_bonus must be non-negative")


def profile_config(profile: str, **overrides) -> TrainConfig:
    if profile not in PROFILE_TOTAL_STEPS:
        raise ValueError(f"unknown profile {profile!r}")
    overrides.setdefault("total_steps", PROFILE_TOTAL_STEPS[profile])
    return TrainConfig(**overrides)


@dataclass(frozen=True)
class EvalRecord:
    step: int
    mean_score: float
    std_score: float
    condition: str
    seed: int


@dataclass
class EpisodeResult:
    trajectory: Trajectory
    engine_total: float
    shaping_total: float
    n_steps: int
    final_kg: KnowledgeGraph


def apply_goal_override(spec: GameSpec, cfg: TrainConfig) -> GameSpec:
    if cfg.goal_reward_override is None:
        return spec
    goal = spec.goal
    return replace(
        spec,
        goal=Goal(
            verb=goal.verb,
            target=goal.target,
            requires=goal.requires,
            reward=cfg.goal_reward_override,
        ),
    )


def run_episode(
    spec: GameSpec,
    params: PolicyParams,
    *,
    mode: str,
    rng: np.random.Generator | None,
    step_cap: int,
    target: KnowledgeGraph | None = None,
    shaping_bonus: float = 0.0,
) -> EpisodeResult:
    """Roll out one episode; rewards in the trajectory include shaping."""
    catalog = enumerate_actions(spec)
    index_of = {action: i for i, action in enumerate(catalog)}

    state, obs = initial_state(spec)
    kg = update_internal(empty_internal_kg(), spec, state, obs)
    ss = new_episode(shaping_bonus) if target is not None else None

    steps: list[TrajectoryStep] = []
    engine_total = 0.0
    shaping_total = 0.0
    done = False
    while not done:
        actions = valid_actions(spec, state)
        mask = np.zeros(len(catalog), dtype=bool)
        for action in actions:
            mask[index_of[action]] = True
        features = featurize(obs, kg, params.feature_dim, params.hash_seed)
        chosen = select_action(params, features, mask, mode=mode, rng=rng)
        state, obs, reward, done = step(spec, state, catalog[chosen], step_cap)
        kg = update_internal(kg, spec, state, obs)
        bonus = 0.0
        if target is not None:
            bonus, ss = shaping_reward(ss, kg, target)
        engine_total += reward
        shaping_total += bonus
        steps.append(
            TrajectoryStep(
                features=features,
                action=chosen,
                mask=mask,
                reward=reward + bonus,
                done=done,
            )
        )
    return EpisodeResult(
        trajectory=Trajectory(steps=tuple(steps)),
        engine_total=engine_total,
        shaping_total=shaping_total,
        n_steps=len(steps),
        final_kg=kg,
    )


def evaluate(
    spec: GameSpec,
    params: PolicyParams,
    episodes: int,
    step_cap: int,
    seed: int,
    *,
    step_index: int = 0,
    condition: str = "eval",
    length_sink: list | None = None,
) -> EvalRecord:
    """Greedy-policy evaluation scoring engine reward only.

    Never touches params or shaping state; the deterministic engine plus
    greedy selection make per-episode scores identical, so std reflects
    exactly that. length_sink, if given, collects per-episode step
    counts (instrumentation for protocol checks).
    """
    if episodes <= 0:
        raise ValueError("episodes must be positive")
    scores = []
    for _ in range(episodes):
        result = run_episode(
            spec, params, mode="greedy", rng=None, step_cap=step_cap
        )
        scores.append(result.engine_total)
        if length_sink is not None:
            length_sink.append(result.n_steps)
    mean = float(np.mean(scores))
    std = float(np.std(scores))
    if not 0.0 <= mean <= spec.goal.reward:
        raise RuntimeError(f"eval mean {mean} outside [0, {spec.goal.reward}]")
    return EvalRecord(
        step=step_index,
        mean_score=mean,
        std_score=std,
        condition=condition,
        seed=seed,
    )


def train(
    spec: GameSpec,
    cfg: TrainConfig,
    target: KnowledgeGraph | None = None,
    *,
    condition: str | None = None,
    episode_hook=None,
    eval_length_sink: list | None = None,
) -> tuple[PolicyParams, list[EvalRecord]]:
    """Train until the environment-step budget is spent.

    Shaping is active iff a target graph is given (it is filtered to
    "you" edges first). Evaluations run at every multiple of eval_every
    up to total_steps, greedy and unshaped, and cost no budget. The
    in-flight episode always finishes before its evals run, so
    trajectories stay complete.
    """
    spec = apply_goal_override(spec, cfg)
    if target is not None:
        target = filter_you_edges(target)
    if condition is None:
        condition = "baseline" if target is None else "shaped"

    catalog = enumerate_actions(spec)
    params = init_params(
        n_actions=len(catalog),
        dim=cfg.feature_dim,
        hidden=cfg.hidden_dim,
        seed=cfg.seed,
        hash_seed=cfg.hash_seed,
    )
    rng = np.random.default_rng([cfg.seed, 1])

    records: list[EvalRecord] = []
    env_steps = 0
    next_eval = cfg.eval_every
    while env_steps < cfg.total_steps:
        result = run_episode(
            spec,
            params,
            mode="sample",
            rng=rng,
            step_cap=cfg.step_cap,
            target=target,
            shaping_bonus=cfg.shaping_bonus,
        )
        env_steps += result.n_steps
        params = a2c_update(
            params,
            [result.trajectory],
            gamma=cfg.gamma,
            lr=cfg.lr,
            value_coef=cfg.value_coef,
            entropy_coef=cfg.entropy_coef,
        )
        if episode_hook is not None:
            episode_hook(result)
        while next_eval <= env_steps and next_eval <= cfg.total_steps:
            records.append(
                evaluate(
                    spec,
                    params,
                    cfg.eval_episodes,
                    cfg.step_cap,
                    cfg.seed,
                    step_index=next_eval,
                    condition=condition,
                    length_sink=eval_length_sink,
                )
            )
            next_eval += cfg.eval_every
    return params, records


def steps_to_first_perfect(records: list[EvalRecord], goal_reward: float) -> int | None:
    for record in records:
        if record.mean_score == goal_reward:
            return record.step
    return None


def curve_auc(records: list[EvalRecord]) -> float:
    ordered = sorted(records, key=lambda r: r.step)
    steps = [r.step for r in ordered]
    means = [r.mean_score for r in ordered]
    if len(steps) < 2:
        return 0.0
    return float(_trapezoid(means, steps))


@dataclass
class ComparisonReport:
    records: dict[str, list[EvalRecord]]
    steps_to_perfect: dict[str, dict[int, int | None]]
    auc: dict[str, dict[int, float]]
    win_pairs: int  # seeds where shaped reaches perfect no later than baseline
    strict_win_pairs: int  # seeds where shaped is strictly earlier
    auc_win_pairs: int  # seeds where shaped AUC is at least baseline's
    seeds: list[int] = field(default_factory=list)


def compare(
    spec: GameSpec, cfg: TrainConfig, target: KnowledgeGraph
) -> ComparisonReport:
    """Matched-seed baseline vs shaped sweep with convergence stats."""
    seeds = [cfg.seed + i for i in range(cfg.n_seeds)]
    records = {"baseline": [], "shaped": []}
    steps_to_perfect = {"baseline": {}, "shaped": {}}
    auc = {"baseline": {}, "shaped": {}}
    goal_reward = (
        cfg.goal_reward_override
        if cfg.goal_reward_override is not None
        else spec.goal.reward
    )

    for seed in seeds:
        seed_cfg = replace(cfg, seed=seed)
        for condition, condition_target in (
            ("baseline", None),
            ("shaped", target),
        ):
            _, recs = train(spec, seed_cfg, condition_target, condition=condition)
            records[condition].extend(recs)
            steps_to_perfect[condition][seed] = steps_to_first_perfect(
                recs, goal_reward
            )
            auc[condition][seed] = curve_auc(recs)

    def infinity_if_none(value):
        return float("inf") if value is None else value

    win = strict = auc_win = 0
    for seed in seeds:
        shaped = infinity_if_none(steps_to_perfect["shaped"][seed])
        baseline = infinity_if_none(steps_to_perfect["baseline"][seed])
        if shaped <= baseline and shaped != float("inf"):
            win += 1
        if shaped < baseline:
            strict += 1
        if auc["shaped"][seed] >= auc["baseline"][seed]:
            auc_win += 1

    return ComparisonReport(
        records=records,
        steps_to_perfect=steps_to_perfect,
        auc=auc,
        win_pairs=win,
        strict_win_pairs=strict,
        auc_win_pairs=auc_win,
        seeds=seeds,
    )


def write_metrics_csv(records: list[EvalRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_HEADER)
        for r in records:
            writer.writerow([r.step, r.mean_score, r.std_score, r.condition, r.seed])


def save_report(report: ComparisonReport, directory: str) -> None:
    os.makedirs(directory, exist_ok=True)
    for condition, recs in report.records.items():
        write_metrics_csv(recs, os.path.join(directory, f"{condition}.csv"))
    summary = {
        "steps_to_perfect": {
            condition: {str(seed): value for seed, value in by_seed.items()}
            for condition, by_seed in report.steps_to_perfect.items()
        },
        "auc": {
            condition: {str(seed): value for seed, value in by_seed.items()}
            for condition, by_seed in report.auc.items()
        },
        "win_pairs": report.win_pairs,
        "strict_win_pairs": report.strict_win_pairs,
        "auc_win_pairs": report.auc_win_pairs,
        "seeds": report.seeds,
    }
    with open(
        os.path.join(directory, "summary.json"), "w", encoding="utf-8"
    ) as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def save_checkpoint(path: str, params: PolicyParams, cfg: TrainConfig) -> None:
    """Versioned dump of weights + config; loading restores greedy behavior."""
    np.savez(
        path,
        version=np.array([1]),
        w1=params.w1,
        b1=params.b1,
        wp=params.wp,
        bp=params.bp,
        wv=params.wv,
        bv=np.array([params.bv]),
        hash_seed=np.array([params.hash_seed]),
        update_count=np.array([params.update_count]),
        config_json=np.array([json.dumps(asdict(cfg), sort_keys=True)]),
    )


def load_checkpoint(path: str) -> tuple[PolicyParams, TrainConfig]:
    with np.load(path, allow_pickle=False) as data:
        version = int(data["version"][0])
        if version != 1:
            raise ValueError(f"unsupported checkpoint version {version}")
        params = PolicyParams(
            w1=data["w1"],
            b1=data["b1"],
            wp=data["wp"],
            bp=data["bp"],
            wv=data["wv"],
            bv=float(data["bv"][0]),
            hash_seed=int(data["hash_seed"][0]),
            update_count=int(data["update_count"][0]),
        )
        cfg = TrainConfig(**json.loads(str(data["config_json"][0])))
    return params, cfg
