"""Interface contracts for policy programs.

A game fixes the set of functions a policy must expose (names, arities,
and which ones the optimizer may rewrite). validate_interface reports every
violation as a human-readable string; an empty list means the program
conforms.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ast as A


@dataclass(frozen=True)
class FunctionSpec:
    name: str
    arity: int
    trainable: bool


def validate_interface(program: A.PolicyProgram, expected: list[FunctionSpec]) -> list[str]:
    violations: list[str] = []
    by_name = {fn.name: fn for fn in program.functions}
    expected_names = {spec.name for spec in expected}

    for spec in expected:
        fn = by_name.get(spec.name)
        if fn is None:
            violations.append(f"missing required function {spec.name}()")
            continue
        if len(fn.params) != spec.arity:
            violations.append(
                f"{spec.name}() must take {spec.arity} argument(s), found {len(fn.params)}"
            )
        if fn.trainable != spec.trainable:
            wanted = "trainable" if spec.trainable else "not trainable"
            violations.append(f"{spec.name}() must be {wanted}")

    for fn in program.functions:
        if fn.trainable and fn.name not in expected_names:
            violations.append(f"unexpected trainable function {fn.name}()")
    return violations
