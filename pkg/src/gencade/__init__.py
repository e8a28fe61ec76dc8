"""gencade: generative rewriting of interpretable arcade-game policies.

Policies are small programs in a sandboxed language. A traced rollout in a
deterministic arcade environment yields an execution graph; staged natural-
language feedback is propagated backward through the graph to the trainable
functions, and a generative backend proposes rewrites that are validated and
applied with rollback.
"""

__version__ = "0.1.0"
