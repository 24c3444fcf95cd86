"""Engine tests: loading, validation, actions, transitions, observations."""

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dialogue_shaping.world import (
    Action,
    GameSpecError,
    InvalidActionError,
    enumerate_actions,
    initial_state,
    load_game_spec,
    parse_action,
    step,
    valid_actions,
)

from conftest import bfs_shortest_win, random_game_spec


def minimal_document(**overrides):
    doc = {
        "rooms": [
            {
                "id": "a",
                "name": "Room A",
                "description": "First room.",
                "exits": {"east": "b"},
            },
            {
                "id": "b",
                "name": "Room B",
                "description": "Second room.",
                "exits": {"west": "a"},
            },
        ],
        "objects": [
            {"id": "knife", "name": "knife", "room": "a", "portable": True}
        ],
        "characters": [
            {"id": "troll", "name": "troll", "room": "b", "hostile": True}
        ],
        "goal": {"verb": "kill", "target": "troll", "requires": "knife", "reward": 15},
        "start_room": "a",
    }
    doc.update(overrides)
    return doc


def load(doc) -> object:
    return load_game_spec(json.dumps(doc))


class TestLoadGameSpec:
    def test_fixture_loads(self, mini_spec):
        assert [r.id for r in mini_spec.rooms] == ["courtyard", "artillery", "dungeon"]
        assert mini_spec.goal.reward == 15
        assert mini_spec.goal.requires == "sword"

    def test_minimal_document_loads(self):
        spec = load(minimal_document())
        assert spec.start_room == "a"

    def test_not_json(self):
        with pytest.raises(GameSpecError, match="not valid JSON"):
            load_game_spec("{nope")

    def test_duplicate_json_key(self):
        text = '{"rooms": [], "rooms": []}'
        with pytest.raises(GameSpecError, match="duplicate key"):
            load_game_spec(text)

    def test_unknown_key_rejected(self):
        with pytest.raises(GameSpecError, match="unknown key 'weather'"):
            load(minimal_document(weather="rainy"))

    def test_missing_key_rejected(self):
        doc = minimal_document()
        del doc["goal"]
        with pytest.raises(GameSpecError, match="missing key 'goal'"):
            load(doc)

    def test_no_rooms(self):
        with pytest.raises(GameSpecError, match="no rooms"):
            load(minimal_document(rooms=[]))

    def test_bad_direction(self):
        doc = minimal_document()
        doc["rooms"][0]["exits"] = {"up": "b"}
        with pytest.raises(GameSpecError, match="invalid direction 'up'"):
            load(doc)

    def test_asymmetric_exit(self):
        doc = minimal_document()
        doc["rooms"][1]["exits"] = {}
        with pytest.raises(GameSpecError, match="asymmetric exit"):
            load(doc)

    def test_exit_to_undeclared_room(self):
        doc = minimal_document()
        doc["rooms"][0]["exits"] = {"east": "nowhere"}
        with pytest.raises(GameSpecError, match="undeclared room 'nowhere'"):
            load(doc)

    def test_duplicate_id_across_kinds(self):
        doc = minimal_document()
        doc["objects"][0]["id"] = "troll"
        with pytest.raises(GameSpecError, match="duplicate id 'troll'"):
            load(doc)

    def test_object_in_undeclared_room(self):
        doc = minimal_document()
        doc["objects"][0]["room"] = "nowhere"
        with pytest.raises(GameSpecError, match="object 'knife'"):
            load(doc)

    def test_goal_target_not_a_character(self):
        doc = minimal_document()
        doc["goal"]["target"] = "knife"
        with pytest.raises(GameSpecError, match="goal target"):
            load(doc)

    def test_goal_requires_unknown_object(self):
        doc = minimal_document()
        doc["goal"]["requires"] = "wand"
        with pytest.raises(GameSpecError, match="undeclared object 'wand'"):
            load(doc)

    def test_goal_requires_non_portable(self):
        doc = minimal_document()
        doc["objects"][0]["portable"] = False
        with pytest.raises(GameSpecError, match="not portable"):
            load(doc)

    def test_goal_reward_not_positive(self):
        doc = minimal_document()
        doc["goal"]["reward"] = 0
        with pytest.raises(GameSpecError, match="positive integer"):
            load(doc)

    def test_goal_verb_unsupported(self):
        doc = minimal_document()
        doc["goal"]["verb"] = "befriend"
        with pytest.raises(GameSpecError, match="goal verb"):
            load(doc)

    def test_start_room_undeclared(self):
        with pytest.raises(GameSpecError, match="start_room"):
            load(minimal_document(start_room="limbo"))

    def test_requires_none_is_legal(self):
        doc = minimal_document()
        doc["goal"]["requires"] = None
        assert load(doc).goal.requires is None


class TestValidActions:
    def test_initial_courtyard(self, mini_spec):
        state, _ = initial_state(mini_spec)
        texts = [a.text(mini_spec) for a in valid_actions(mini_spec, state)]
        assert texts == ["go east", "go north"]

    def test_artillery_with_sword_on_floor(self, mini_spec):
        state, _ = initial_state(mini_spec)
        state, _, _, _ = step(mini_spec, state, parse_action(mini_spec, "go east"), 75)
        texts = [a.text(mini_spec) for a in valid_actions(mini_spec, state)]
        assert texts == ["go west", "get sword"]

    def test_dungeon_holding_sword(self, mini_spec):
        state, _ = initial_state(mini_spec)
        for cmd in ["go east", "get sword", "go west", "go north"]:
            state, _, _, _ = step(mini_spec, state, parse_action(mini_spec, cmd), 75)
        texts = [a.text(mini_spec) for a in valid_actions(mini_spec, state)]
        assert texts == [
            "go south",
            "drop sword",
            "kill dragon with sword",
            "kill dragon",
        ]

    def test_done_state_has_no_actions(self, mini_spec):
        state, _ = initial_state(mini_spec)
        for cmd in ["go east", "get sword", "go west", "go north",
                    "kill dragon with sword"]:
            state, _, _, _ = step(mini_spec, state, parse_action(mini_spec, cmd), 75)
        assert state.done
        assert valid_actions(mini_spec, state) == []


class TestStep:
    def test_optimal_walk_pays_goal_reward(self, mini_spec):
        state, _ = initial_state(mini_spec)
        total = 0
        for cmd in ["go east", "get sword", "go west", "go north",
                    "kill dragon with sword"]:
            state, obs, reward, done = step(
                mini_spec, state, parse_action(mini_spec, cmd), 75
            )
            total += reward
        assert total == 15
        assert done and state.done
        assert state.steps_taken == 5
        assert "won the game" in obs.last_action_feedback

    def test_every_non_winning_step_pays_zero(self, mini_spec):
        state, _ = initial_state(mini_spec)
        for cmd in ["go east", "get sword", "go west", "go north"]:
            state, _, reward, done = step(
                mini_spec, state, parse_action(mini_spec, cmd), 75
            )
            assert reward == 0 and not done

    def test_wrong_kill_fails_and_continues(self, mini_spec):
        state, _ = initial_state(mini_spec)
        for cmd in ["go north"]:
            state, _, _, _ = step(mini_spec, state, parse_action(mini_spec, cmd), 75)
        state, obs, reward, done = step(
            mini_spec, state, parse_action(mini_spec, "kill dragon"), 75
        )
        assert reward == 0 and not done
        assert state.character_alive["dragon"]
        assert "shrugs off" in obs.last_action_feedback

    def test_invalid_action_raises(self, mini_spec):
        state, _ = initial_state(mini_spec)
        with pytest.raises(InvalidActionError):
            step(mini_spec, state, parse_action(mini_spec, "go south"), 75)

    def test_get_drop_round_trip(self, mini_spec):
        state, _ = initial_state(mini_spec)
        state, _, _, _ = step(mini_spec, state, parse_action(mini_spec, "go east"), 75)
        state, _, _, _ = step(mini_spec, state, parse_action(mini_spec, "get sword"), 75)
        assert "sword" in state.inventory
        state, obs, _, _ = step(
            mini_spec, state, parse_action(mini_spec, "drop sword"), 75
        )
        assert "sword" not in state.inventory
        assert state.object_locations["sword"] == "artillery"
        assert "You see sword here." in obs.room_description

    def test_cap_terminates_episode(self, mini_spec):
        state, _ = initial_state(mini_spec)
        cap = 6
        done = False
        count = 0
        while not done:
            action = valid_actions(mini_spec, state)[0]
            state, _, reward, done = step(mini_spec, state, action, cap)
            count += 1
            assert reward == 0
        assert count == cap
        assert state.steps_taken == cap

    def test_step_after_done_raises(self, mini_spec):
        state, _ = initial_state(mini_spec)
        state, _, _, done = step(
            mini_spec, state, parse_action(mini_spec, "go east"), 1
        )
        assert done
        with pytest.raises(InvalidActionError):
            step(mini_spec, state, Action(kind="go", direction="west"), 1)

    def test_states_are_fresh_values(self, mini_spec):
        state, _ = initial_state(mini_spec)
        before = state.object_locations["sword"]
        step(mini_spec, state, parse_action(mini_spec, "go east"), 75)
        assert state.steps_taken == 0
        assert state.object_locations["sword"] == before


class TestObservations:
    def test_initial_observation_channels(self, mini_spec):
        _, obs = initial_state(mini_spec)
        assert obs.room_description.startswith("Courtyard.")
        assert "Exits: east, north." in obs.room_description
        assert obs.inventory_text == "You are carrying nothing."
        assert obs.last_action_feedback == ""
        assert obs.last_action_text == ""

    def test_character_and_corpse_shown(self, mini_spec):
        state, _ = initial_state(mini_spec)
        state, obs, _, _ = step(mini_spec, state, parse_action(mini_spec, "go north"), 75)
        assert "A dragon is here." in obs.room_description

    def test_inventory_listed_after_get(self, mini_spec):
        state, _ = initial_state(mini_spec)
        state, _, _, _ = step(mini_spec, state, parse_action(mini_spec, "go east"), 75)
        state, obs, _, _ = step(
            mini_spec, state, parse_action(mini_spec, "get sword"), 75
        )
        assert obs.inventory_text == "You are carrying: sword."
        assert obs.last_action_text == "get sword"


class TestActionGrammar:
    def test_round_trip_over_reachable_actions(self, mini_spec):
        state, _ = initial_state(mini_spec)
        for cmd in ["go east", "get sword", "go west", "go north"]:
            for action in valid_actions(mini_spec, state):
                assert parse_action(mini_spec, action.text(mini_spec)) == action
            state, _, _, _ = step(mini_spec, state, parse_action(mini_spec, cmd), 75)

    def test_take_is_a_get_synonym(self, mini_spec):
        assert parse_action(mini_spec, "take sword") == Action(
            kind="get", object_id="sword"
        )

    def test_unparseable_commands(self, mini_spec):
        for text in ["", "dance", "go up", "get wand", "kill sword with dragon"]:
            with pytest.raises(InvalidActionError):
                parse_action(mini_spec, text)

    def test_catalog_order_and_coverage(self, mini_spec):
        texts = [a.text(mini_spec) for a in enumerate_actions(mini_spec)]
        assert texts == [
            "go north",
            "go south",
            "go east",
            "go west",
            "get sword",
            "drop sword",
            "kill dragon with sword",
            "kill dragon",
        ]


class TestReachability:
    def test_bfs_oracle_on_fixtures(self, mini_spec, game1_spec):
        assert bfs_shortest_win(mini_spec) == 5
        assert bfs_shortest_win(game1_spec) == 9

    def test_random_specs_winnable_when_connected(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            spec = random_game_spec(rng)
            shortest = bfs_shortest_win(spec)
            assert shortest is not None
            assert shortest <= 75


@given(seed=st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_random_walks_never_crash_and_reward_only_on_win(seed):
    rng = np.random.default_rng(seed)
    spec = random_game_spec(rng)
    state, obs = initial_state(spec)
    total = 0
    done = False
    while not done:
        actions = valid_actions(spec, state)
        assert actions, "live episode must always have a valid action"
        action = actions[rng.integers(len(actions))]
        state, obs, reward, done = step(spec, state, action, 40)
        assert reward in (0, spec.goal.reward)
        total += reward
    assert state.done
    assert total in (0, spec.goal.reward)
    assert state.steps_taken <= 40
