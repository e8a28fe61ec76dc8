"""Generative-optimizer plumbing: prompts, backends, parsing, rollback.

One optimization iteration turns (current program, trace slice, feedback,
memory of recent attempts) into a prompt, sends it to a text backend —
a live HTTP endpoint or a deterministic scripted mock — and parses the
response for fenced code blocks tagged with trainable function names.
Each proposed body is spliced into the program, the whole program is
re-validated (parse, interface, smoke run on a frozen observation), and
any failure rolls back to the original program with a rejection record.
"""

from __future__ import annotations

import os
import re
import time
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

import requests

from .dsl import (
    DslError,
    ENTRY_FUNCTION,
    Interpreter,
    ObservationView,
    ParseError,
    PolicyProgram,
    format_function,
    format_program,
    parse,
    parse_function_body,
    validate_interface,
)
from .policies import GAME_INTERFACES, load_snapshot
from .tracing import DEFAULT_CHAR_BUDGET, FeedbackBinding, TraceGraph, extract_prompt_slice

API_KEY_ENV_VAR = "GENCADE_API_KEY"
SMOKE_STEP_BUDGET = 20_000
SMOKE_RNG_SEED = 0


class BackendError(Exception):
    """Raised when the generative backend cannot produce a usable response."""


class MalformedResponseError(BackendError):
    """Raised when a response has no usable function-tagged code block."""


class PromptBudgetError(Exception):
    """Raised when the prompt cannot fit the character budget."""


@dataclass
class OptimizerConfig:
    memory_size: int = 5
    char_budget: int = DEFAULT_CHAR_BUDGET
    backend: str = "mock"  # mock | http
    endpoint: str = ""
    model_name: str = ""
    max_retries: int = 2
    mock_script: Optional[str] = None  # directory of NN.txt responses

    def __post_init__(self) -> None:
        if self.memory_size < 0:
            raise ValueError("memory_size must be >= 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.backend not in ("mock", "http"):
            raise ValueError(f"unknown backend {self.backend!r}")


@dataclass(frozen=True)
class PromptContext:
    """The four prompt sections, rendered deterministically."""

    code_section: str
    trace_section: str
    feedback_section: str
    memory_section: str
    trainable_names: tuple[str, ...]
    function_names: tuple[str, ...]  # all declared functions, for tag checks

    def render(self) -> str:
        return (
            "You are improving a game-playing policy written in a small "
            "scripting language. Rewrite one or more of the trainable "
            "functions to raise the game score. For every function you "
            "change, reply with one fenced code block whose info string is "
            "exactly the function name, containing the full new function "
            "body (docstring first, then statements, indented consistently). "
            "Only these functions may be rewritten: "
            + ", ".join(self.trainable_names)
            + ".\n\n# Current trainable code\n\n"
            + self.code_section
            + "\n\n# Execution trace (newest steps first)\n\n"
            + self.trace_section
            + "\n\n# Feedback\n\n"
            + self.feedback_section
            + "\n\n# Previous attempts\n\n"
            + self.memory_section
            + "\n"
        )


class OptimizerMemory:
    """Rolling window of the last N (update summary, feedback) pairs."""

    def __init__(self, size: int):
        self.size = size
        self._entries: deque[tuple[str, str]] = deque(maxlen=size)

    def add(self, update_summary: str, feedback: str) -> None:
        self._entries.append((update_summary, feedback))

    def entries(self) -> list[tuple[str, str]]:
        return list(self._entries)

    def render(self) -> str:
        entries = self.entries()
        if not entries:
            return "(no prior attempts)"
        parts = []
        for index, (update, fb) in enumerate(entries, 1):
            parts.append(f"Attempt {index}:\n{update}\nResulting feedback: {fb}")
        return "\n\n".join(parts)


def build_prompt(
    graph: TraceGraph,
    bindings: list[FeedbackBinding],
    feedback_text: str,
    program: PolicyProgram,
    memory: OptimizerMemory,
    config: OptimizerConfig,
) -> PromptContext:
    """Assemble the four prompt sections under ``config.char_budget``.

    The code, feedback, and memory sections are rendered first; the trace
    slice receives whatever budget remains (and raises through
    ``extract_prompt_slice`` if not even one step fits).
    """
    trainable = tuple(fn.name for fn in program.trainable_functions)
    code_section = "\n\n".join(
        f"```{fn.name}\n{format_function(fn)}```" for fn in program.trainable_functions
    )
    memory_section = memory.render()
    fixed = len(code_section) + len(feedback_text) + len(memory_section) + 600
    trace_budget = config.char_budget - fixed
    if trace_budget <= 0:
        raise PromptBudgetError(
            f"code/feedback/memory sections alone use {fixed} characters of "
            f"the {config.char_budget}-character budget"
        )
    trace_section = extract_prompt_slice(graph, bindings, trace_budget)
    return PromptContext(
        code_section=code_section,
        trace_section=trace_section,
        feedback_section=feedback_text,
        memory_section=memory_section,
        trainable_names=trainable,
        function_names=tuple(fn.name for fn in program.functions),
    )


@dataclass(frozen=True)
class CandidateUpdate:
    """Parsed backend response: replacement bodies per trainable function."""

    replacements: dict[str, str]
    commentary: str = ""

    def summary(self) -> str:
        names = ", ".join(sorted(self.replacements)) or "(nothing)"
        return f"rewrote {names}"


_FENCE_RE = re.compile(r"```([^\n`]*)\n(.*?)```", re.DOTALL)


def parse_response(
    text: str, trainable: Iterable[str], declared: Iterable[str]
) -> CandidateUpdate:
    """Extract function-tagged fenced blocks from backend output.

    Blocks tagged with a trainable function name become replacements; a
    block tagged with a declared-but-not-trainable function is an error;
    any other tag (``python``, empty, prose) is ignored as commentary.
    With no usable block at all the response is malformed.
    """
    function_names = set(declared)
    trainable = set(trainable)
    replacements: dict[str, str] = {}
    for match in _FENCE_RE.finditer(text):
        tag = match.group(1).strip()
        body = match.group(2)
        if tag in trainable:
            replacements[tag] = body
        elif tag in function_names:
            raise MalformedResponseError(
                f"response rewrites {tag}(), which is not trainable"
            )
    if not replacements:
        raise MalformedResponseError(
            "response contains no code block tagged with a trainable function"
        )
    commentary = _FENCE_RE.sub("", text).strip()
    return CandidateUpdate(replacements=replacements, commentary=commentary)


class MockBackend:
    """Deterministic scripted backend: returns canned responses in order.

    Scripts are a directory of ``*.txt`` files replayed in sorted filename
    order (or an explicit list of texts). A call past the end of the
    script is a backend error.
    """

    def __init__(self, script_dir: Optional[str] = None, responses: Optional[Iterable[str]] = None):
        if responses is not None:
            self._responses = list(responses)
        elif script_dir is not None:
            try:
                names = sorted(
                    n for n in os.listdir(script_dir) if n.endswith(".txt")
                )
            except OSError as exc:
                raise BackendError(f"cannot read mock script directory: {exc}") from exc
            self._responses = [
                open(os.path.join(script_dir, n), encoding="utf-8").read() for n in names
            ]
        else:
            self._responses = []
        self._cursor = 0

    def complete(self, prompt: str) -> str:
        del prompt  # scripted: the reply does not depend on the prompt
        if self._cursor >= len(self._responses):
            raise BackendError(
                f"mock script exhausted after {len(self._responses)} responses"
            )
        text = self._responses[self._cursor]
        self._cursor += 1
        return text


class HttpBackend:
    """Single-turn text-completion client: POST {model, prompt} -> {text}."""

    def __init__(self, endpoint: str, model_name: str, timeout: float = 120.0):
        if not endpoint:
            raise BackendError("http backend requires an endpoint URL")
        self.endpoint = endpoint
        self.model_name = model_name
        self.timeout = timeout

    def complete(self, prompt: str) -> str:
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(API_KEY_ENV_VAR)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        try:
            response = requests.post(
                self.endpoint,
                json={"model": self.model_name, "prompt": prompt},
                headers=headers,
                timeout=self.timeout,
            )
            response.raise_for_status()
            body = response.json()
        except (requests.RequestException, ValueError) as exc:
            raise BackendError(f"backend request failed: {exc}") from exc
        if not isinstance(body, dict) or not isinstance(body.get("text"), str):
            raise BackendError("backend response is missing a text field")
        return body["text"]


def make_backend(config: OptimizerConfig):
    if config.backend == "mock":
        return MockBackend(script_dir=config.mock_script)
    return HttpBackend(config.endpoint, config.model_name)


def propose_update(
    context: PromptContext,
    config: OptimizerConfig,
    backend=None,
    sleep=time.sleep,
) -> tuple[CandidateUpdate, str]:
    """Query the backend for a candidate update; returns (update, raw text).

    Network failures and malformed responses are retried up to
    ``config.max_retries`` additional times; after that the last error is
    raised as a backend error.
    """
    if backend is None:
        backend = make_backend(config)
    prompt = context.render()
    last_error: Optional[Exception] = None
    for attempt in range(config.max_retries + 1):
        if attempt > 0 and config.backend == "http":
            sleep(min(2.0 ** attempt, 10.0))
        try:
            text = backend.complete(prompt)
            update = parse_response(
                text, context.trainable_names, context.function_names
            )
            return update, text
        except MalformedResponseError as exc:
            last_error = exc
        except BackendError as exc:
            last_error = exc
    raise BackendError(
        f"backend failed after {config.max_retries + 1} attempts: {last_error}"
    )


@dataclass(frozen=True)
class Rejection:
    """Why a candidate update was rolled back."""

    stage: str  # parse | validate | interface | smoke
    detail: str

    def __str__(self) -> str:
        return f"{self.stage}: {self.detail}"


def apply_update(
    program: PolicyProgram,
    update: CandidateUpdate,
    game: str,
) -> tuple[PolicyProgram, Optional[Rejection]]:
    """Splice a candidate update into the program, or roll back.

    On success returns (new program, None); on any failure returns the
    original program unchanged plus the rejection reason. Validation
    stages: per-function body parse, whole-program re-parse, interface
    check, and a smoke run of the entry function on the game's frozen
    mid-episode observation.
    """
    current = {fn.name: fn for fn in program.functions}
    candidate = program
    for name, body in update.replacements.items():
        if name not in current or not current[name].trainable:
            return program, Rejection("validate", f"{name}() is not a trainable function")
        try:
            new_fn = parse_function_body(body, name, current[name].params, trainable=True)
        except ParseError as exc:
            return program, Rejection("parse", f"{name}(): {exc}")
        candidate = candidate.replace_function(new_fn)
    try:
        candidate = parse(format_program(candidate))
    except DslError as exc:
        return program, Rejection("validate", str(exc))
    violations = validate_interface(candidate, GAME_INTERFACES[game])
    if violations:
        return program, Rejection("interface", "; ".join(violations))
    obs = load_snapshot(game)
    try:
        interp = Interpreter(
            candidate, step_budget=SMOKE_STEP_BUDGET, rng_seed=SMOKE_RNG_SEED
        )
        interp.call(ENTRY_FUNCTION, [ObservationView(obs)])
    except DslError as exc:
        return program, Rejection("smoke", str(exc))
    return candidate, None
