"""Execution-trace graphs for policy rollouts.

A rollout is recorded as an append-only DAG.  Three node kinds exist:

* ``input`` nodes hold an environment observation (one per executed step).
  From step 1 onward each input node lists the previous step's output node
  as its single input, which chains the whole rollout into one connected
  graph: the environment transition consumed that action to produce the
  new observation.
* ``parameter`` nodes stand for the trainable functions themselves (one
  per trainable function, created before any step runs).
* ``call`` nodes record one invocation of a trainable function made by the
  entry function.  Their inputs are the provenance nodes of the call's
  arguments plus exactly one parameter node (the function being called).

Node ids are 1-based and strictly increasing; a node's inputs always have
smaller ids than the node itself, so the graph is acyclic by construction.

``backward`` walks the graph from a chosen target node and produces one
:class:`FeedbackBinding` per trainable parameter that the target depends
on; ``extract_prompt_slice`` renders the bound steps as text under a
character budget, dropping whole steps oldest-first when the budget is
tight.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

DEFAULT_CHAR_BUDGET = 60_000

NODE_KINDS = ("input", "parameter", "call")


class TraceError(Exception):
    """Base class for trace-graph failures."""


class NodeLookupError(TraceError):
    """Raised when a node id does not exist in the graph."""

    def __init__(self, node_id: int) -> None:
        super().__init__(f"unknown trace node id: {node_id}")
        self.node_id = node_id


class GraphStructureError(TraceError):
    """Raised when a recorded node would violate a graph invariant."""


class SliceBudgetError(TraceError):
    """Raised when not even the newest step fits the character budget."""

    def __init__(self, budget: int, needed: int) -> None:
        super().__init__(
            f"prompt slice budget too small: newest step needs {needed} "
            f"characters but the budget is {budget}"
        )
        self.budget = budget
        self.needed = needed


@dataclass(frozen=True)
class TraceNode:
    """One vertex of the execution-trace DAG."""

    id: int
    kind: str
    function: Optional[str]  # trainable function name; None for inputs
    label: Optional[str]  # human-readable tag for input nodes
    inputs: tuple[int, ...]
    output: Any  # JSON-compatible snapshot of the produced value
    step_index: Optional[int]  # None for parameter nodes

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "function": self.function,
            "label": self.label,
            "inputs": list(self.inputs),
            "output": self.output,
            "step_index": self.step_index,
        }


class TraceGraph:
    """Append-only DAG of one traced rollout.

    Besides the nodes, the graph tracks per-step bookkeeping: which node
    produced each step's action (``outputs_per_step``), the reward earned
    on each step (``rewards_per_step``), and the RNG seed the policy
    interpreter was given on each step (``step_seeds``) so the rollout can
    be re-executed losslessly.
    """

    def __init__(self) -> None:
        self.nodes: list[TraceNode] = []
        self.outputs_per_step: dict[int, int] = {}
        self.rewards_per_step: dict[int, float] = {}
        self.step_seeds: dict[int, int] = {}

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    def _append(
        self,
        kind: str,
        function: Optional[str],
        label: Optional[str],
        inputs: Iterable[int],
        output: Any,
        step_index: Optional[int],
    ) -> int:
        node_id = len(self.nodes) + 1
        input_ids = tuple(int(i) for i in inputs)
        for ref in input_ids:
            if not 1 <= ref < node_id:
                raise GraphStructureError(
                    f"node {node_id} references id {ref}, which does not "
                    f"precede it in the graph"
                )
        node = TraceNode(
            id=node_id,
            kind=kind,
            function=function,
            label=label,
            inputs=input_ids,
            output=copy.deepcopy(output),
            step_index=step_index,
        )
        self.nodes.append(node)
        return node_id

    def record_input(
        self,
        label: str,
        value: Any,
        step_index: int,
        inputs: Iterable[int] = (),
    ) -> int:
        """Record an observation (or other environment-produced value) node."""
        return self._append("input", None, label, inputs, value, step_index)

    def record_parameter(self, function: str) -> int:
        """Record the node standing for one trainable function."""
        for node in self.nodes:
            if node.kind == "parameter" and node.function == function:
                raise GraphStructureError(
                    f"parameter node for {function}() already exists"
                )
        return self._append("parameter", function, None, (), None, None)

    def record_call(
        self,
        function: str,
        input_ids: Iterable[int],
        output: Any,
        step_index: int,
    ) -> int:
        """Record one trainable-function invocation."""
        ids = tuple(int(i) for i in input_ids)
        param_refs = []
        for ref in ids:
            if not 1 <= ref <= len(self.nodes):
                raise GraphStructureError(
                    f"call to {function}() references unknown node id {ref}"
                )
            if self.nodes[ref - 1].kind == "parameter":
                param_refs.append(ref)
        # The rollout tracer always wires in the called function's own
        # parameter node; at this level we only reject contradictions
        # (several parameter refs, or a ref to a different function's code).
        if len(param_refs) > 1:
            raise GraphStructureError(
                f"call to {function}() must reference at most one parameter "
                f"node, got {len(param_refs)}"
            )
        if param_refs:
            param = self.nodes[param_refs[0] - 1]
            if param.function != function:
                raise GraphStructureError(
                    f"call to {function}() references the parameter node of "
                    f"{param.function}()"
                )
        return self._append("call", function, None, ids, output, step_index)

    def record_step(self, step_index: int, output_node: int, reward: float, seed: int) -> None:
        """Close out one rollout step's bookkeeping."""
        self.node(output_node)  # validate the id
        if step_index in self.outputs_per_step:
            raise GraphStructureError(f"step {step_index} recorded twice")
        self.outputs_per_step[step_index] = output_node
        self.rewards_per_step[step_index] = float(reward)
        self.step_seeds[step_index] = int(seed)

    # ------------------------------------------------------------------
    # Lookup
    # ------------------------------------------------------------------

    def node(self, node_id: int) -> TraceNode:
        if not isinstance(node_id, int) or not 1 <= node_id <= len(self.nodes):
            raise NodeLookupError(node_id)
        return self.nodes[node_id - 1]

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def steps(self) -> list[int]:
        return sorted(self.outputs_per_step)

    def last_output_node(self) -> int:
        """Id of the output node of the newest recorded step."""
        if not self.outputs_per_step:
            raise GraphStructureError("graph has no recorded steps")
        return self.outputs_per_step[max(self.outputs_per_step)]

    def parameter_node(self, function: str) -> int:
        for node in self.nodes:
            if node.kind == "parameter" and node.function == function:
                return node.id
        raise GraphStructureError(f"no parameter node for {function}()")

    def consumers(self) -> dict[int, list[int]]:
        """Forward adjacency: node id -> ids of nodes that list it as input."""
        out: dict[int, list[int]] = {node.id: [] for node in self.nodes}
        for node in self.nodes:
            for ref in node.inputs:
                out[ref].append(node.id)
        return out

    # ------------------------------------------------------------------
    # Serialization (JSON array of nodes; per-step bookkeeping rides on
    # each step's output node so the array alone round-trips the graph)
    # ------------------------------------------------------------------

    def to_json(self) -> str:
        rows = []
        output_steps = {nid: step for step, nid in self.outputs_per_step.items()}
        for node in self.nodes:
            row = node.to_dict()
            if node.id in output_steps:
                step = output_steps[node.id]
                row["step_output"] = True
                row["reward"] = self.rewards_per_step[step]
                row["seed"] = self.step_seeds[step]
            rows.append(row)
        return json.dumps(rows, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TraceGraph":
        try:
            rows = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TraceError(f"trace dump is not valid JSON: {exc}") from exc
        if not isinstance(rows, list):
            raise TraceError("trace dump must be a JSON array of nodes")
        graph = cls()
        for row in sorted(rows, key=lambda r: r.get("id", 0)):
            if row.get("id") != len(graph.nodes) + 1:
                raise TraceError(
                    f"trace dump node ids must be 1..N without gaps; "
                    f"got {row.get('id')} at position {len(graph.nodes)}"
                )
            kind = row.get("kind")
            if kind not in NODE_KINDS:
                raise TraceError(f"unknown node kind in trace dump: {kind!r}")
            graph._append(
                kind,
                row.get("function"),
                row.get("label"),
                row.get("inputs", ()),
                row.get("output"),
                row.get("step_index"),
            )
            if row.get("step_output"):
                graph.record_step(
                    row["step_index"], row["id"], row.get("reward", 0.0), row.get("seed", 0)
                )
        return graph


# ----------------------------------------------------------------------
# Backward feedback propagation
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class FeedbackBinding:
    """Feedback attached to one trainable parameter.

    ``subgraph`` is the id-ordered set of nodes that lie on some backward
    path from the target through one of the parameter's call nodes —
    i.e. the portion of the trace this parameter can be blamed for.
    """

    parameter: str  # trainable function identifier
    parameter_node: int  # id of that function's parameter node
    subgraph: tuple[int, ...]
    feedback: str


def _ancestors_or_self(graph: TraceGraph, node_id: int) -> set[int]:
    seen: set[int] = set()
    stack = [node_id]
    while stack:
        current = stack.pop()
        if current in seen:
            continue
        seen.add(current)
        stack.extend(graph.node(current).inputs)
    return seen


def _forward_within(graph: TraceGraph, sources: set[int], allowed: set[int]) -> set[int]:
    """Nodes reachable forward from ``sources`` without leaving ``allowed``."""
    adjacency = graph.consumers()
    seen: set[int] = set()
    stack = [s for s in sources if s in allowed]
    while stack:
        current = stack.pop()
        if current in seen:
            continue
        seen.add(current)
        for nxt in adjacency[current]:
            if nxt in allowed:
                stack.append(nxt)
    return seen


def backward(graph: TraceGraph, target: int, feedback: str) -> list[FeedbackBinding]:
    """Propagate ``feedback`` from ``target`` to every trainable parameter
    it depends on.

    Returns one binding per parameter node reachable backward from the
    target, ordered by parameter node id.  Each binding's subgraph holds
    exactly the ancestors of the target restricted to paths that pass
    through one of that parameter's call nodes (the target itself
    included).
    """
    target_node = graph.node(target)  # raises NodeLookupError if unknown
    del target_node
    ancestry = _ancestors_or_self(graph, target)
    bindings: list[FeedbackBinding] = []
    for node in graph.nodes:
        if node.kind != "parameter" or node.id not in ancestry:
            continue
        calls = {
            c.id
            for c in graph.nodes
            if c.kind == "call" and node.id in c.inputs and c.id in ancestry
        }
        if not calls:
            # The parameter reached the ancestry only through call nodes,
            # so this cannot happen on well-formed graphs; skip defensively.
            continue
        upstream: set[int] = set()
        for call_id in calls:
            upstream |= _ancestors_or_self(graph, call_id)
        downstream = _forward_within(graph, calls, ancestry)
        # Upstream nodes are ancestors of a call node, which is itself an
        # ancestor of the target, so the union stays inside the ancestry.
        members = upstream | downstream
        bindings.append(
            FeedbackBinding(
                parameter=node.function or "",
                parameter_node=node.id,
                subgraph=tuple(sorted(members)),
                feedback=feedback,
            )
        )
    return bindings


# ----------------------------------------------------------------------
# Prompt slice rendering
# ----------------------------------------------------------------------


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "none"
    if isinstance(value, float):
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        return f"{value:.2f}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    if isinstance(value, str):
        return f'"{value}"'
    return str(value)


def _format_signed(value: float) -> str:
    number = _format_value(value)
    return number if number.startswith("-") else "+" + number


def _format_object(label: str, obj: dict) -> str:
    return (
        f"{label} x={_format_value(obj['x'])} y={_format_value(obj['y'])} "
        f"w={_format_value(obj['w'])} h={_format_value(obj['h'])} "
        f"dx={_format_signed(obj['dx'])} dy={_format_signed(obj['dy'])}"
    )


def _render_observation(obs: dict, indent: str) -> list[str]:
    lines = [
        f"{indent}lives={_format_value(obs.get('lives'))} "
        f"score={_format_value(obs.get('score'))}"
    ]
    objects = obs.get("objects", {})
    for label in sorted(objects):
        lines.append(f"{indent}{_format_object(label, objects[label])}")
    return lines


def _render_step(
    graph: TraceGraph,
    step: int,
    call_nodes: list[TraceNode],
    input_nodes: list[TraceNode],
) -> str:
    lines = [f"== step {step} (rng seed {graph.step_seeds.get(step, 0)}) =="]
    for node in input_nodes:
        value = node.output
        if isinstance(value, dict) and "objects" in value:
            lines.append(f"  {node.label or 'input'} [node {node.id}]:")
            lines.extend(_render_observation(value, "    "))
        else:
            lines.append(
                f"  {node.label or 'input'} [node {node.id}] = {_format_value(value)}"
            )
    for node in call_nodes:
        args = ", ".join(f"node {ref}" for ref in node.inputs)
        lines.append(
            f"  {node.function}({args}) -> {_format_value(node.output)} "
            f"[node {node.id}]"
        )
    if step in graph.outputs_per_step:
        lines.append(
            f"  action node: {graph.outputs_per_step[step]}; "
            f"reward: {_format_signed(graph.rewards_per_step.get(step, 0.0))}"
        )
    return "\n".join(lines)


def extract_prompt_slice(
    graph: TraceGraph,
    bindings: list[FeedbackBinding],
    char_budget: int = DEFAULT_CHAR_BUDGET,
) -> str:
    """Render the steps covered by ``bindings`` as prompt text.

    Steps are those containing at least one call node bound to some
    parameter in ``bindings``.  Rendering is newest-step-first; when the
    budget is exceeded, whole steps are dropped oldest-first and the
    header reports how many survive.  If even the single newest step does
    not fit, a :class:`SliceBudgetError` is raised.
    """
    bound = set()
    for binding in bindings:
        bound.update(binding.subgraph)
    steps: dict[int, dict[str, list[TraceNode]]] = {}
    for node in graph.nodes:
        if node.id not in bound or node.step_index is None:
            continue
        entry = steps.setdefault(node.step_index, {"calls": [], "inputs": []})
        if node.kind == "call":
            entry["calls"].append(node)
        elif node.kind == "input":
            entry["inputs"].append(node)
    # Only steps with at least one bound call carry signal for the
    # optimizer; inputs alone (e.g. the chained observation of a step
    # whose calls belong to no bound parameter) are skipped.
    ordered = [s for s in sorted(steps, reverse=True) if steps[s]["calls"]]
    total = len(ordered)
    if total == 0:
        return "trace: no traced steps bound to feedback\n"
    rendered: list[str] = []
    used = 0
    header_reserve = len(f"trace: showing {total} of {total} steps, newest first\n\n")
    for step in ordered:
        text = _render_step(graph, step, steps[step]["calls"], steps[step]["inputs"])
        cost = len(text) + 2  # blank line between steps
        if used + cost + header_reserve > char_budget:
            if not rendered:
                raise SliceBudgetError(char_budget, cost + header_reserve)
            break
        rendered.append(text)
        used += cost
    header = f"trace: showing {len(rendered)} of {total} steps, newest first\n\n"
    return header + "\n\n".join(rendered) + "\n"
