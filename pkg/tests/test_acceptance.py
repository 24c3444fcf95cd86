"""Acceptance gate: the seven headline checks, one verdict line each.

Each test prints "ACCEPTANCE <name>: PASS|FAIL" so a scan of the output
gives the whole scorecard. Run with -s (or check captured stdout) to
see the lines. Stated runtime budgets are asserted, not just hoped for.
"""

import time

import numpy as np

from dialogue_shaping.dialogue import (
    extract_target_kg,
    oracle_npc,
    run_dialogue,
    scripted_questioner,
)
from dialogue_shaping.harness import (
    profile_config,
    compare,
    run_episode,
    train,
    write_metrics_csv,
)
from dialogue_shaping.kg import (
    KnowledgeGraph,
    Triple,
    filter_you_edges,
    overlap,
    parse_kg_text,
    serialize_kg,
)
from dialogue_shaping.learner import (
    TrajectoryStep,
    a2c_loss_and_grads,
    init_params,
    value_iteration,
)
from dialogue_shaping.world import enumerate_actions

from conftest import finite_difference_grads, relative_error


class _gate:
    """Prints one scorecard line for the enclosed criterion."""

    def __init__(self, name):
        self.name = name
        self.start = time.monotonic()

    def elapsed(self):
        return time.monotonic() - self.start

    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, exc_type, exc, tb):
        verdict = "PASS" if exc_type is None else "FAIL"
        print(f"ACCEPTANCE {self.name}: {verdict}")
        return False


def test_dialogue_fidelity(mini_spec):
    with _gate("dialogue_fidelity") as gate:
        transcript = run_dialogue(
            mini_spec, scripted_questioner(mini_spec), oracle_npc(mini_spec)
        )
        assert transcript.outcome == "sufficient"
        assert transcript.rounds_used == 3
        kinds = [q.kind for q, _ in transcript.pairs()]
        assert kinds == ["needs_object", "which_object", "where_is"]
        surfaces = [a.surface for _, a in transcript.pairs()]
        assert surfaces == ["Yes.", "A sword.", "The Artillery room."]
        assert gate.elapsed() < 1.0


def test_kg_extraction(mini_spec):
    with _gate("kg_extraction"):
        graph = parse_kg_text(
            "you--have→rugs, town center --west→ the bar", kind="target"
        )
        assert graph.edges == {
            Triple("you", "have", "rugs"),
            Triple("town center", "west", "the bar"),
        }
        assert filter_you_edges(graph).edges == {Triple("you", "have", "rugs")}

        words = (
            "you bar rugs sword town center artillery room dragon gate "
            "cellar key lamp crypt hall door north stone well 7 red"
        ).split()
        relations = ("have", "in", "west", "east", "kill", "north of", "holds")
        rng = np.random.default_rng(2024)
        for _ in range(1_000):
            edges = set()
            for _ in range(rng.integers(1, 7)):
                subject = " ".join(
                    rng.choice(words, size=rng.integers(1, 4), replace=True)
                )
                obj = " ".join(
                    rng.choice(words, size=rng.integers(1, 4), replace=True)
                )
                relation = relations[rng.integers(len(relations))]
                edges.add(Triple(subject, relation, obj))
            kind = ("internal", "target")[rng.integers(2)]
            graph = KnowledgeGraph(kind=kind, edges=frozenset(edges))
            assert parse_kg_text(serialize_kg(graph), kind=kind) == graph


def test_oracle_equivalence(mini_spec):
    with _gate("oracle_equivalence") as gate:
        assert value_iteration(mini_spec) == (15.0, 5)
        for seed in (0, 1, 2):
            cfg = profile_config("desk", seed=seed)
            _, records = train(mini_spec, cfg)
            perfect = [
                r for r in records if r.mean_score == 15.0 and r.std_score == 0.0
            ]
            assert perfect, f"seed {seed} never reached the oracle return"
        assert gate.elapsed() < 300.0


def test_convergence_speedup(mini_spec):
    with _gate("convergence_speedup") as gate:
        transcript = run_dialogue(
            mini_spec, scripted_questioner(mini_spec), oracle_npc(mini_spec)
        )
        target = extract_target_kg(transcript)
        report = compare(mini_spec, profile_config("desk", n_seeds=10), target)
        assert report.strict_win_pairs >= 8, report.steps_to_perfect
        assert report.auc_win_pairs >= 8, report.auc
        assert gate.elapsed() < 1800.0


def test_shaping_accounting(mini_spec):
    with _gate("shaping_accounting"):
        transcript = run_dialogue(
            mini_spec, scripted_questioner(mini_spec), oracle_npc(mini_spec)
        )
        target = filter_you_edges(extract_target_kg(transcript))
        n_actions = len(enumerate_actions(mini_spec))
        bonuses = (0.5, 1.0, 2.0, 3.7)
        for episode in range(1_000):
            params = init_params(n_actions, dim=64, hidden=16, seed=episode)
            rng = np.random.default_rng([3, episode])
            bonus = bonuses[episode % len(bonuses)]
            result = run_episode(
                mini_spec,
                params,
                mode="sample",
                rng=rng,
                step_cap=75,
                target=target,
                shaping_bonus=bonus,
            )
            matched = overlap(result.final_kg, target)
            assert result.shaping_total == bonus * len(matched)
            assert result.shaping_total <= bonus * len(target.edges)

        for seed in (0, 1):
            seeded = profile_config(
                "desk", total_steps=900, eval_episodes=2, shaping_bonus=0.0,
                feature_dim=64, hidden_dim=16, seed=seed,
            )
            shaped_stream, baseline_stream = [], []
            train(
                mini_spec, seeded, target,
                episode_hook=lambda r: shaped_stream.extend(
                    s.reward for s in r.trajectory.steps
                ),
            )
            train(
                mini_spec, seeded, None,
                episode_hook=lambda r: baseline_stream.extend(
                    s.reward for s in r.trajectory.steps
                ),
            )
            assert shaped_stream == baseline_stream


def test_protocol_arithmetic(mini_spec, tmp_path):
    with _gate("protocol_arithmetic"):
        cfg = profile_config("full")
        lengths = []
        _, first = train(mini_spec, cfg, eval_length_sink=lengths)
        assert len(first) == 100_000 // 450 == 222
        assert [r.step for r in first] == [450 * i for i in range(1, 223)]
        assert len(lengths) == 222 * cfg.eval_episodes
        assert all(1 <= n <= 75 for n in lengths)

        _, second = train(mini_spec, cfg)
        a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        write_metrics_csv(first, a)
        write_metrics_csv(second, b)
        with open(a, "rb") as fh:
            first_bytes = fh.read()
        with open(b, "rb") as fh:
            second_bytes = fh.read()
        assert first_bytes == second_bytes


def test_gradient_check():
    with _gate("gradient_check"):
        rng = np.random.default_rng(0)
        for instance in range(100):
            n_actions = int(rng.integers(2, 7))
            dim, hidden = 8, 4
            params = init_params(n_actions, dim=dim, hidden=hidden, seed=instance)
            steps = []
            for _ in range(int(rng.integers(1, 5))):
                mask = rng.random(n_actions) < 0.7
                if mask.sum() < 2:
                    mask[:2] = True
                steps.append(
                    TrajectoryStep(
                        features=rng.normal(size=dim),
                        action=int(rng.choice(np.flatnonzero(mask))),
                        mask=mask,
                        reward=float(rng.normal()),
                        done=False,
                    )
                )
            returns = rng.normal(size=len(steps))
            advantages = rng.normal(size=len(steps))
            _, grads = a2c_loss_and_grads(
                params, steps, returns, advantages,
                value_coef=0.5, entropy_coef=0.01,
            )
            fd = finite_difference_grads(
                params, steps, returns, advantages,
                value_coef=0.5, entropy_coef=0.01,
            )
            for name in ("w1", "b1", "wp", "bp", "wv", "bv"):
                err = relative_error(
                    np.asarray(getattr(grads, name)), np.asarray(fd[name])
                )
                assert err <= 1e-4, f"instance {instance} {name}: {err}"
