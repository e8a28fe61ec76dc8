"""Policy rollouts: traced (for the optimizer) and plain (for evaluation).

A traced rollout runs the policy's entry function once per environment
step with tracing switched on, building a :class:`~gencade.tracing.TraceGraph`
in which each step's observation becomes an input node, each trainable
call becomes a call node wired to its argument provenance plus the called
function's parameter node, and each step's action-producing node feeds the
next step's observation node — chaining the rollout into one DAG.

Policy failures (runtime errors, exhausted step budgets, invalid actions)
never raise out of the rollout; they end the episode early and are
reported on the result so the training loop can fold them into feedback.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from .dsl.ast import ENTRY_FUNCTION, PolicyProgram
from .dsl.errors import DslError
from .dsl.interpreter import (
    DEFAULT_STEP_BUDGET,
    Interpreter,
    ObjectView,
    ObservationView,
    Tracer,
)
from .envs import EnvConfig, InvalidActionError, make_env, obs_to_dict
from .tracing import TraceGraph

_SEED_MASK = 0xFFFFFFFF
_SEED_STRIDE = 1_000_003  # prime stride decorrelates per-step interpreter RNG


def derive_step_seed(base_seed: int, step_index: int) -> int:
    """Deterministic per-step RNG seed for the policy interpreter."""
    return (base_seed * _SEED_STRIDE + step_index) & _SEED_MASK


def snapshot_value(value: Any) -> Any:
    """JSON-compatible snapshot of a value produced during execution."""
    if isinstance(value, ObservationView):
        return obs_to_dict(value._obs)
    if isinstance(value, ObjectView):
        snap = value.as_dict()
        snap["label"] = value.label
        return snap
    if isinstance(value, (list, tuple)):
        return [snapshot_value(v) for v in value]
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    return repr(value)


def coerce_action(value: Any) -> int:
    """Map a policy return value onto an integer action.

    Booleans and integral floats are accepted; anything else raises
    ``ValueError`` with a description usable as feedback text.
    """
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value == int(value):
        return int(value)
    raise ValueError(f"policy returned {value!r}, which is not a valid action number")


class RolloutTracer(Tracer):
    """Adapter feeding interpreter call events into a trace graph."""

    def __init__(self, graph: TraceGraph, parameter_nodes: dict[str, int]):
        self.graph = graph
        self.parameter_nodes = parameter_nodes
        self.step_index = 0
        self.last_call_id: Optional[int] = None

    def record_trainable_call(self, function: str, input_ids: frozenset[int], output: Any) -> int:
        ids = sorted(input_ids) + [self.parameter_nodes[function]]
        node_id = self.graph.record_call(
            function, ids, snapshot_value(output), self.step_index
        )
        self.last_call_id = node_id
        return node_id


@dataclass
class RolloutResult:
    """Outcome of one episode (traced or plain)."""

    game: str
    total_reward: float
    steps_executed: int
    terminated: bool
    error: Optional[str] = None
    actions: list[int] = field(default_factory=list)
    graph: Optional[TraceGraph] = None


def run_traced_rollout(
    program: PolicyProgram,
    game: str,
    *,
    env_seed: int,
    max_steps: int,
    step_budget: int = DEFAULT_STEP_BUDGET,
    rng_base_seed: Optional[int] = None,
) -> RolloutResult:
    """Run up to ``max_steps`` environment steps with tracing on."""
    if rng_base_seed is None:
        rng_base_seed = env_seed
    env = make_env(EnvConfig(game=game, seed=env_seed, max_steps=max_steps))
    obs = env.reset()
    graph = TraceGraph()
    parameter_nodes = {
        fn.name: graph.record_parameter(fn.name)
        for fn in program.trainable_functions
    }
    tracer = RolloutTracer(graph, parameter_nodes)
    total = 0.0
    actions: list[int] = []
    error: Optional[str] = None
    terminated = False
    prev_output: Optional[int] = None
    step = 0
    while step < max_steps:
        obs_snapshot = obs_to_dict(obs)
        obs_inputs = () if prev_output is None else (prev_output,)
        input_id = graph.record_input("obs", obs_snapshot, step, obs_inputs)
        tracer.step_index = step
        tracer.last_call_id = None
        seed = derive_step_seed(rng_base_seed, step)
        interp = Interpreter(
            program, step_budget=step_budget, rng_seed=seed, tracer=tracer
        )
        try:
            value, prov = interp.call_traced(
                ENTRY_FUNCTION, [ObservationView(obs)], [frozenset({input_id})]
            )
            action = coerce_action(value)
        except (DslError, ValueError) as exc:
            error = str(exc)
            break
        # The node that "produced" the action: the returned value's
        # provenance if it has one, else the newest call this step, else
        # the observation itself (a constant policy still consumed it).
        if prov:
            output_node = max(prov)
        elif tracer.last_call_id is not None:
            output_node = tracer.last_call_id
        else:
            output_node = input_id
        try:
            result = env.step(action)
        except InvalidActionError as exc:
            error = str(exc)
            break
        graph.record_step(step, output_node, result.reward, seed)
        total += result.reward
        actions.append(action)
        prev_output = output_node
        obs = result.obs
        step += 1
        if result.terminated or result.truncated:
            terminated = result.terminated
            break
    return RolloutResult(
        game=game,
        total_reward=total,
        steps_executed=len(graph.outputs_per_step),
        terminated=terminated,
        error=error,
        actions=actions,
        graph=graph,
    )


def run_episode(
    program: PolicyProgram,
    game: str,
    *,
    env_seed: int,
    max_steps: int,
    step_budget: int = DEFAULT_STEP_BUDGET,
    rng_base_seed: Optional[int] = None,
) -> RolloutResult:
    """Run one untraced episode (used for full-game evaluation)."""
    if rng_base_seed is None:
        rng_base_seed = env_seed
    env = make_env(EnvConfig(game=game, seed=env_seed, max_steps=max_steps))
    obs = env.reset()
    total = 0.0
    actions: list[int] = []
    error: Optional[str] = None
    terminated = False
    step = 0
    while step < max_steps:
        seed = derive_step_seed(rng_base_seed, step)
        interp = Interpreter(program, step_budget=step_budget, rng_seed=seed)
        try:
            action = coerce_action(interp.call(ENTRY_FUNCTION, [ObservationView(obs)]))
        except (DslError, ValueError) as exc:
            error = str(exc)
            break
        try:
            result = env.step(action)
        except InvalidActionError as exc:
            error = str(exc)
            break
        total += result.reward
        actions.append(action)
        obs = result.obs
        step += 1
        if result.terminated or result.truncated:
            terminated = result.terminated
            break
    return RolloutResult(
        game=game,
        total_reward=total,
        steps_executed=step,
        terminated=terminated,
        error=error,
        actions=actions,
    )


def replay_traced_rollout(
    program: PolicyProgram,
    graph: TraceGraph,
    game: str,
    *,
    env_seed: int,
    max_steps: int,
    step_budget: int = DEFAULT_STEP_BUDGET,
    rng_base_seed: Optional[int] = None,
) -> bool:
    """Re-execute a rollout and check every node's output is reproduced.

    The stored per-step seeds drive the interpreter exactly as during
    recording, so a faithful simulator + interpreter must reproduce the
    graph node for node.
    """
    replayed = run_traced_rollout(
        program,
        game,
        env_seed=env_seed,
        max_steps=max_steps,
        step_budget=step_budget,
        rng_base_seed=rng_base_seed,
    )
    other = replayed.graph
    if other is None or len(other.nodes) != len(graph.nodes):
        return False
    for a, b in zip(graph.nodes, other.nodes):
        if (a.kind, a.function, a.label, a.inputs, a.output, a.step_index) != (
            b.kind,
            b.function,
            b.label,
            b.inputs,
            b.output,
            b.step_index,
        ):
            return False
    return (
        graph.outputs_per_step == other.outputs_per_step
        and graph.rewards_per_step == other.rewards_per_step
        and graph.step_seeds == other.step_seeds
    )
