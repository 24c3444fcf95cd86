"""Agent-NPC dialogue for extracting winning hints.

The NPC side answers from game ground truth, either through the
rule-based oracle here or through a chat model primed with the NPC
prompt. The agent side asks questions, either through the deterministic
scripted plan or through a chat model primed with the questioner
prompt. Any combination works; tests exercise the hermetic pairs.

A finished transcript is distilled into a target knowledge graph whose
"you" edges drive reward shaping during training.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import json
import re

from .chat import ChatError, ChatSession
from .kg import KGParseError, KnowledgeGraph, Triple, normalize, parse_kg_text
from .prompts import render_kg_prompt
from .world import GameSpec

QUESTION_KINDS = ("needs_object", "which_object", "where_is", "layout", "yes_no_free")
POLARITIES = ("yes", "no", "n/a")

DEFAULT_MAX_ROUNDS = 10


class DialogueError(Exception):
    """A questioner or answerer failed mid-dialogue."""

    def __init__(self, message: str, transcript: "DialogueTranscript"):
        super().__init__(message)
        self.transcript = transcript


class ExtractionError(ValueError):
    """Transcript could not be turned into a target KG."""

    def __init__(self, message: str, raw_reply: str | None = None):
        super().__init__(message)
        self.raw_reply = raw_reply


@dataclass(frozen=True)
class Question:
    kind: str
    surface: str
    entity: str | None = None  # where_is / layout referent
    goal_verb: str | None = None  # needs_object / which_object
    goal_target: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in QUESTION_KINDS:
            raise ValueError(f"unknown question kind {self.kind!r}")
        if not self.surface:
            raise ValueError("question surface text must be non-empty")
        if self.kind in ("needs_object", "which_object"):
            if not (self.goal_verb and self.goal_target):
                raise ValueError(f"{self.kind} question must carry its goal")
        if self.kind in ("where_is", "layout") and not self.entity:
            raise ValueError(f"{self.kind} question must carry its referent")


@dataclass(frozen=True)
class Answer:
    polarity: str
    payload: str | None
    surface: str

    def __post_init__(self) -> None:
        if self.polarity not in POLARITIES:
            raise ValueError(f"unknown answer polarity {self.polarity!r}")
        if not self.surface:
            raise ValueError("answer surface text must be non-empty")


@dataclass(frozen=True)
class DialogueRound:
    questions: tuple[Question, ...]
    answers: tuple[Answer, ...]

    def __post_init__(self) -> None:
        if len(self.questions) != len(self.answers):
            raise ValueError("each question needs exactly one answer")


@dataclass
class DialogueTranscript:
    rounds: list[DialogueRound] = field(default_factory=list)
    outcome: str = "exhausted"

    @property
    def rounds_used(self) -> int:
        return len(self.rounds)

    def pairs(self):
        for rnd in self.rounds:
            yield from zip(rnd.questions, rnd.answers)


def needs_object_question(goal_verb: str, goal_target: str) -> Question:
    return Question(
        kind="needs_object",
        surface=f"Do I need an object to {goal_verb} the {goal_target}?",
        goal_verb=goal_verb,
        goal_target=goal_target,
    )


def which_object_question(goal_verb: str, goal_target: str) -> Question:
    return Question(
        kind="which_object",
        surface=f"What object I should get to {goal_verb} the {goal_target}?",
        goal_verb=goal_verb,
        goal_target=goal_target,
    )


def where_is_question(entity: str) -> Question:
    return Question(
        kind="where_is",
        surface=f"Where can I find the {entity}?",
        entity=normalize(entity),
    )


def layout_question(room: str) -> Question:
    return Question(
        kind="layout",
        surface=f"What rooms are adjacent to the {room}?",
        entity=normalize(room),
    )


def free_question(text: str) -> Question:
    return Question(kind="yes_no_free", surface=text)


def npc_answer(spec: GameSpec, q: Question) -> Answer:
    """Ground-truth answer to one question.

    Every question gets an answer; free-form yes/no questions are
    denied, which is always consistent with a single-prerequisite goal
    and covers questions about entities the game does not contain.
    """
    goal = spec.goal
    if q.kind == "needs_object":
        if goal.requires is not None:
            return Answer(polarity="yes", payload=None, surface="Yes.")
        return Answer(polarity="no", payload=None, surface="No.")

    if q.kind == "which_object":
        if goal.requires is None:
            return Answer(
                polarity="no", payload=None, surface="You do not need any object."
            )
        name = spec.object(goal.requires).name
        return Answer(polarity="n/a", payload=normalize(name), surface=f"A {name}.")

    if q.kind == "where_is":
        for obj in spec.objects:
            if normalize(obj.name) == q.entity:
                room = spec.room(obj.room)
                return Answer(
                    polarity="n/a",
                    payload=normalize(room.name),
                    surface=f"The {room.name}.",
                )
        for char in spec.characters:
            if normalize(char.name) == q.entity:
                room = spec.room(char.room)
                return Answer(
                    polarity="n/a",
                    payload=normalize(room.name),
                    surface=f"The {room.name}.",
                )
        return Answer(
            polarity="no",
            payload=None,
            surface=f"The game does not have a {q.entity}.",
        )

    if q.kind == "layout":
        for room in spec.rooms:
            if normalize(room.name) == q.entity:
                entries = [
                    f"{normalize(spec.room(dest).name)}-{d}-{normalize(room.name)}"
                    for d, dest in room.exits
                ]
                if not entries:
                    return Answer(
                        polarity="n/a",
                        payload=None,
                        surface=f"The {room.name} has no exits.",
                    )
                return Answer(
                    polarity="n/a", payload=None, surface=", ".join(entries) + "."
                )
        return Answer(
            polarity="no",
            payload=None,
            surface=f"The game does not have a {q.entity}.",
        )

    return Answer(polarity="no", payload=None, surface="No.")


def _transcript_facts(transcript: DialogueTranscript) -> dict:
    facts = {"needs": None, "object": None, "location": None}
    for q, a in transcript.pairs():
        if q.kind == "needs_object" and a.polarity in ("yes", "no"):
            facts["needs"] = a.polarity
        elif q.kind == "which_object" and a.payload:
            facts["object"] = a.payload
        elif q.kind == "where_is" and a.payload and q.entity == facts["object"]:
            facts["location"] = a.payload
    return facts


def transcript_sufficient(transcript: DialogueTranscript) -> bool:
    """True once the hints pin down a winning plan.

    Either no object is needed and that has been established, or the
    required object has been both identified and located.
    """
    facts = _transcript_facts(transcript)
    if facts["needs"] == "no":
        return True
    return facts["object"] is not None and facts["location"] is not None


def scripted_next_questions(
    transcript: DialogueTranscript, goal, *, target_name: str | None = None
) -> list[Question]:
    """The deterministic question plan: need? which? where? then stop.

    Follow-ups chase only affirmative answers; a "no" on the opening
    question ends the plan immediately. Returns [] once the transcript
    is sufficient.
    """
    target = normalize(target_name if target_name is not None else goal.target)
    facts = _transcript_facts(transcript)
    if facts["needs"] is None:
        return [needs_object_question(goal.verb, target)]
    if facts["needs"] == "no":
        return []
    if facts["object"] is None:
        return [which_object_question(goal.verb, target)]
    if facts["location"] is None:
        return [where_is_question(facts["object"])]
    return []


def oracle_npc(spec: GameSpec):
    def answer(q: Question) -> Answer:
        return npc_answer(spec, q)

    return answer


def scripted_questioner(spec: GameSpec):
    target_name = spec.character(spec.goal.target).name

    def next_questions(transcript: DialogueTranscript) -> list[Question]:
        return scripted_next_questions(
            transcript, spec.goal, target_name=target_name
        )

    return next_questions


def run_dialogue(
    spec: GameSpec,
    questioner,
    npc,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> DialogueTranscript:
    """Alternate questioner and answerer until sufficiency or the cap.

    questioner: transcript -> list of Question ([] meaning stop);
    npc: Question -> Answer. Client failures surface as DialogueError
    carrying the partial transcript.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    transcript = DialogueTranscript()
    for _ in range(max_rounds):
        try:
            questions = questioner(transcript)
        except ChatError as exc:
            raise DialogueError(f"questioner failed: {exc}", transcript) from exc
        if not questions:
            break
        try:
            answers = tuple(npc(q) for q in questions)
        except ChatError as exc:
            raise DialogueError(f"answerer failed: {exc}", transcript) from exc
        transcript.rounds.append(
            DialogueRound(questions=tuple(questions), answers=answers)
        )
        if transcript_sufficient(transcript):
            break
    transcript.outcome = (
        "sufficient" if transcript_sufficient(transcript) else "exhausted"
    )
    return transcript


_QUESTION_PATTERNS = (
    ("needs_object", re.compile(r"do i need an object to (\w+) the ([\w ]+)$")),
    ("which_object", re.compile(r"what object .*to (\w+) the ([\w ]+)$")),
    ("where_is", re.compile(r"where (?:can i find|is) (?:the |a |an )?([\w ]+)$")),
    ("layout", re.compile(r"what rooms are adjacent to (?:the )?([\w ]+)$")),
)


def parse_question_text(text: str) -> Question:
    """Classify one free-text question into a structured kind if it fits."""
    cleaned = normalize(text).rstrip("?").strip()
    for kind, pattern in _QUESTION_PATTERNS:
        match = pattern.fullmatch(cleaned)
        if not match:
            continue
        if kind == "needs_object":
            return needs_object_question(match.group(1), match.group(2))
        if kind == "which_object":
            return which_object_question(match.group(1), match.group(2))
        if kind == "where_is":
            return where_is_question(match.group(1))
        return layout_question(match.group(1))
    return free_question(text.strip())


def parse_answer_text(text: str) -> Answer:
    """Classify one free-text answer: yes/no prefix, else payload text."""
    cleaned = text.strip()
    lowered = normalize(cleaned).rstrip(".")
    if lowered == "yes" or lowered.startswith("yes,") or lowered.startswith("yes."):
        return Answer(polarity="yes", payload=None, surface=cleaned)
    if lowered == "no" or lowered.startswith("no,") or lowered.startswith("no."):
        return Answer(polarity="no", payload=None, surface=cleaned)
    payload = lowered
    for article in ("a ", "an ", "the "):
        if payload.startswith(article):
            payload = payload[len(article) :]
            break
    return Answer(polarity="n/a", payload=payload or None, surface=cleaned)


def llm_npc(session: ChatSession):
    """Answerer backed by a chat session primed with the NPC prompt."""

    def answer(q: Question) -> Answer:
        return parse_answer_text(session.send(q.surface))

    return answer


def llm_questioner(session: ChatSession):
    """Questioner backed by a chat session primed with the agent prompt.

    Each turn feeds the previous round's answers back and splits the
    reply into one question per sentence.
    """

    def next_questions(transcript: DialogueTranscript) -> list[Question]:
        if transcript_sufficient(transcript):
            return []
        if not transcript.rounds:
            prompt = "Ask your first set of questions."
        else:
            last = transcript.rounds[-1]
            prompt = " ".join(a.surface for a in last.answers)
        reply = session.send(prompt)
        questions = [
            parse_question_text(part + "?")
            for part in reply.split("?")
            if part.strip()
        ]
        return questions

    return next_questions


def extract_target_kg(
    transcript: DialogueTranscript,
    extractor: str = "structured",
    *,
    session: ChatSession | None = None,
) -> KnowledgeGraph:
    """Distill a finished dialogue into a target KG.

    Structured mode reads the facts straight out of the transcript and
    needs outcome=sufficient; llm mode asks the session to emit textual
    edges and parses them. Callers filter to "you" edges before using
    the result for shaping.
    """
    if extractor == "structured":
        if transcript.outcome != "sufficient":
            raise ExtractionError(
                "transcript is not sufficient; cannot extract a target KG"
            )
        goal_verb = goal_target = None
        for q, _ in transcript.pairs():
            if q.goal_verb:
                goal_verb, goal_target = q.goal_verb, q.goal_target
                break
        if goal_verb is None:
            raise ExtractionError("transcript carries no goal-bearing question")
        facts = _transcript_facts(transcript)
        edges = {Triple("you", goal_verb, goal_target)}
        if facts["needs"] != "no":
            edges.add(Triple("you", "have", facts["object"]))
            edges.add(Triple(facts["object"], "in", facts["location"]))
        return KnowledgeGraph(edges=frozenset(edges), kind="target")

    if extractor == "llm":
        if session is None:
            raise ValueError("llm extraction needs a chat session")
        reply = session.send(render_kg_prompt())
        try:
            return parse_kg_text(reply)
        except KGParseError as exc:
            raise ExtractionError(
                f"could not parse KG reply: {exc}", raw_reply=reply
            ) from exc

    raise ValueError(f"unknown extractor {extractor!r}")


def save_transcript(transcript: DialogueTranscript, path: str) -> None:
    """JSON-lines dump: one round per line plus an outcome trailer."""
    with open(path, "w", encoding="utf-8") as fh:
        for number, rnd in enumerate(transcript.rounds, start=1):
            fh.write(
                json.dumps(
                    {
                        "round": number,
                        "questions": [q.__dict__ for q in rnd.questions],
                        "answers": [a.__dict__ for a in rnd.answers],
                    }
                )
                + "\n"
            )
        fh.write(
            json.dumps(
                {
                    "outcome": transcript.outcome,
                    "rounds_used": transcript.rounds_used,
                }
            )
            + "\n"
        )


def load_transcript(path: str) -> DialogueTranscript:
    transcript = DialogueTranscript()
    trailer = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            record = json.loads(line)
            if "outcome" in record:
                trailer = record
                continue
            transcript.rounds.append(
                DialogueRound(
                    questions=tuple(Question(**q) for q in record["questions"]),
                    answers=tuple(Answer(**a) for a in record["answers"]),
                )
            )
    if trailer is None:
        raise ValueError(f"transcript file {path!r} has no outcome trailer")
    transcript.outcome = trailer["outcome"]
    if trailer["rounds_used"] != transcript.rounds_used:
        raise ValueError("transcript trailer disagrees with round count")
    return transcript
