"""Text-adventure RL workbench.

Ties together a deterministic game engine, NPC dialogue that yields
goal-relevant hints, knowledge-graph reward shaping, and a small
actor-critic learner, plus the experiment harness that compares shaped
training against the sparse-reward baseline.
"""

__version__ = "0.1.0"

from .chat import (
    ChatConfig,
    ChatError,
    ChatExchange,
    ChatSession,
    StubTransport,
    chat_complete,
)
from .dialogue import (
    Answer,
    DialogueError,
    DialogueTranscript,
    ExtractionError,
    Question,
    extract_target_kg,
    npc_answer,
    run_dialogue,
    scripted_next_questions,
    scripted_questioner,
    oracle_npc,
)
from .harness import (
    ComparisonReport,
    EvalRecord,
    TrainConfig,
    compare,
    evaluate,
    load_checkpoint,
    profile_config,
    run_episode,
    save_checkpoint,
    save_report,
    train,
    write_metrics_csv,
)
from .learner import (
    PolicyParams,
    Trajectory,
    TrajectoryStep,
    a2c_update,
    featurize,
    init_params,
    select_action,
    value_iteration,
)
from .prompts import render_agent_prompt, render_kg_prompt, render_npc_prompt
from .shaping import ShapingState, new_episode, shaping_reward
from .kg import (
    KGParseError,
    KnowledgeGraph,
    Triple,
    empty_internal_kg,
    filter_you_edges,
    load_kg_file,
    overlap,
    parse_kg_text,
    save_kg_file,
    serialize_kg,
    update_internal,
)
from .world import (
    Action,
    GameSpec,
    GameSpecError,
    InvalidActionError,
    ObservationBundle,
    WorldState,
    enumerate_actions,
    initial_state,
    load_game_spec,
    load_game_spec_file,
    parse_action,
    step,
    valid_actions,
)

__all__ = [
    "Action",
    "Answer",
    "ChatConfig",
    "ChatError",
    "ChatExchange",
    "ChatSession",
    "ComparisonReport",
    "DialogueError",
    "DialogueTranscript",
    "EvalRecord",
    "ExtractionError",
    "GameSpec",
    "GameSpecError",
    "InvalidActionError",
    "KGParseError",
    "KnowledgeGraph",
    "ObservationBundle",
    "PolicyParams",
    "Question",
    "ShapingState",
    "StubTransport",
    "TrainConfig",
    "Trajectory",
    "TrajectoryStep",
    "Triple",
    "WorldState",
    "__version__",
    "a2c_update",
    "chat_complete",
    "compare",
    "empty_internal_kg",
    "enumerate_actions",
    "evaluate",
    "extract_target_kg",
    "featurize",
    "filter_you_edges",
    "init_params",
    "initial_state",
    "load_checkpoint",
    "load_game_spec",
    "load_game_spec_file",
    "load_kg_file",
    "new_episode",
    "npc_answer",
    "oracle_npc",
    "overlap",
    "parse_action",
    "parse_kg_text",
    "profile_config",
    "render_agent_prompt",
    "render_kg_prompt",
    "render_npc_prompt",
    "run_dialogue",
    "run_episode",
    "save_checkpoint",
    "save_kg_file",
    "save_report",
    "scripted_next_questions",
    "scripted_questioner",
    "select_action",
    "serialize_kg",
    "shaping_reward",
    "step",
    "train",
    "update_internal",
    "valid_actions",
    "value_iteration",
    "write_metrics_csv",
]
