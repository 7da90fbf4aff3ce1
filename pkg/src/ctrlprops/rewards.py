"""Reward structures over quantized traces and reward reachability.

A reward structure holds guarded ``(predicate, reward)`` pairs for states
(accrued per time step spent in the state) and for transitions (accrued when
a transition leaves a source state satisfying the predicate). When several
guards match, their rewards are summed.

Besides the trace variables, expressions may reference ``tau`` (the trace's
sampling period), ``error`` (the quantized error norm, when the caller
supplies it) and any caller-supplied constants.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from ._validation import check_labels
from .exceptions import ConfigurationError
from .expressions import Expression
from .signal_model import QuantizedTrace

#: A nonnegative float or ``math.inf``.
ExtendedReal = float

RESERVED_NAMES = frozenset({"tau", "error"})


@dataclass(frozen=True)
class RewardPair:
    guard: Expression
    expr: Expression

    def __post_init__(self):
        object.__setattr__(self, "guard", Expression(self.guard))
        object.__setattr__(self, "expr", Expression(self.expr))

    @property
    def names(self) -> frozenset[str]:
        return self.guard.names | self.expr.names


def _pairs(items) -> tuple[RewardPair, ...]:
    out = []
    for item in items or ():
        if isinstance(item, RewardPair):
            out.append(item)
        elif isinstance(item, Mapping):
            try:
                out.append(RewardPair(item["guard"], item["expr"]))
            except KeyError as exc:
                raise ConfigurationError(f"reward pair {dict(item)} lacks {exc}") from None
        else:
            guard, expr = item
            out.append(RewardPair(guard, expr))
    return tuple(out)


@dataclass(frozen=True)
class RewardStructure:
    """Named sets of guarded state and transition rewards.

    >>> time = RewardStructure("time", transition_pairs=[("true", "tau")])
    """

    name: str
    state_pairs: tuple[RewardPair, ...] = ()
    transition_pairs: tuple[RewardPair, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "state_pairs", _pairs(self.state_pairs))
        object.__setattr__(self, "transition_pairs", _pairs(self.transition_pairs))
        if not self.state_pairs and not self.transition_pairs:
            raise ConfigurationError(f"reward structure {self.name!r} has no pairs")

    @property
    def names(self) -> frozenset[str]:
        """Every name referenced by a guard or reward expression."""
        out = frozenset()
        for pair in self.state_pairs + self.transition_pairs:
            out |= pair.names
        return out

    def __add__(self, other: RewardStructure) -> RewardStructure:
        return RewardStructure(f"{self.name}+{other.name}",
                               self.state_pairs + other.state_pairs,
                               self.transition_pairs + other.transition_pairs)

    def to_dict(self) -> dict:
        return {
            "state": [{"guard": p.guard.source, "expr": p.expr.source} for p in self.state_pairs],
            "transition": [{"guard": p.guard.source, "expr": p.expr.source}
                           for p in self.transition_pairs],
        }

    @classmethod
    def from_dict(cls, name: str, data: Mapping) -> RewardStructure:
        unknown = set(data) - {"state", "transition"}
        if unknown:
            raise ConfigurationError(f"reward structure {name!r}: unknown keys {sorted(unknown)}")
        return cls(name, data.get("state", ()), data.get("transition", ()))


def time_reward() -> RewardStructure:
    """``(true, tau)``: one sampling period per transition."""
    return RewardStructure("time", transition_pairs=[("true", "tau")])


def squared_error_reward() -> RewardStructure:
    """``(true, error^2)`` on the quantized error norm."""
    return RewardStructure("error", transition_pairs=[("true", "error * error")])


def _accrue(pairs: Iterable[RewardPair], env: Mapping, n: int, kind: str, name: str) -> np.ndarray:
    total = np.zeros(n)
    for pair in pairs:
        guard = np.broadcast_to(np.asarray(pair.guard.evaluate(env)), (n,))
        if guard.dtype != bool:
            raise ConfigurationError(f"{name}: guard {pair.guard.source!r} is not boolean")
        if not guard.any():
            continue
        value = np.broadcast_to(np.asarray(pair.expr.evaluate(env), dtype=float), (n,))
        active = value[guard]
        if (active < 0).any() or np.isnan(active).any():
            bad = int(np.flatnonzero(guard & ~(value >= 0))[0])
            raise ConfigurationError(
                f"{name}: {kind} reward {pair.expr.source!r} is negative or undefined "
                f"({value[bad]}) at state {bad}"
            )
        total += np.where(guard, value, 0.0)
    return total


def trace_environment(trace: QuantizedTrace, constants: Mapping | None = None,
                      error: np.ndarray | None = None) -> dict:
    env = dict(constants or {})
    clash = RESERVED_NAMES.intersection(env) | set(trace.variables).intersection(env)
    if clash:
        raise ConfigurationError(f"constants shadow reserved or trace names: {sorted(clash)}")
    env.update({name: trace.column(name) for name in trace.variables})
    env["tau"] = trace.tau
    if error is not None:
        env["error"] = np.asarray(error, dtype=float)
    return env


def state_rewards(trace: QuantizedTrace, structure: RewardStructure,
                  constants: Mapping | None = None, error=None) -> np.ndarray:
    """Per-state reward ``iota(s_k)`` for every state of ``trace``."""
    env = trace_environment(trace, constants, error)
    return _accrue(structure.state_pairs, env, len(trace), "state", structure.name)


def transition_rewards(trace: QuantizedTrace, structure: RewardStructure,
                       constants: Mapping | None = None, error=None) -> np.ndarray:
    """Per-state reward of the transition leaving state ``k``."""
    env = trace_environment(trace, constants, error)
    return _accrue(structure.transition_pairs, env, len(trace), "transition", structure.name)


def eval_state_reward(structure: RewardStructure, state: Mapping, constants: Mapping | None = None) -> float:
    """Sum of the rewards of every state pair whose guard holds in ``state``."""
    env = {**(constants or {}), **state}
    return float(_accrue(structure.state_pairs, env, 1, "state", structure.name)[0])


def eval_transition_reward(structure: RewardStructure, source: Mapping,
                           constants: Mapping | None = None) -> float:
    """Sum of the rewards of every transition pair whose guard holds in the source state."""
    env = {**(constants or {}), **source}
    return float(_accrue(structure.transition_pairs, env, 1, "transition", structure.name)[0])


def first_goal(goal) -> int | None:
    goal = np.asarray(goal, dtype=bool)
    hits = np.flatnonzero(goal)
    return int(hits[0]) if hits.size else None


def accrued_rewards(trace: QuantizedTrace, structure: RewardStructure,
                    constants: Mapping | None = None, error=None,
                    scale_by_tau: bool = False) -> np.ndarray:
    """Reward accrued in each step ``k -> k+1`` (state plus transition part)."""
    trans = transition_rewards(trace, structure, constants, error)
    if scale_by_tau:
        trans = trans * trace.tau
    return state_rewards(trace, structure, constants, error) + trans


def reach_reward(trace: QuantizedTrace, structure: RewardStructure, goal,
                 constants: Mapping | None = None, error=None,
                 scale_by_tau: bool = False) -> ExtendedReal:
    """Reward accrued strictly before the first goal state; ``inf`` if none is reached.

    With ``scale_by_tau`` each transition reward is multiplied by ``tau``.
    The sum is exactly rounded (``math.fsum``) so it does not depend on the
    summation order.
    """
    goal = check_labels(goal, len(trace))
    k_star = first_goal(goal)
    if k_star is None:
        return math.inf
    if k_star == 0:
        return 0.0
    head = trace.window(0, k_star)
    err = None if error is None else np.asarray(error, dtype=float)[:k_star]
    trans = transition_rewards(head, structure, constants, err)
    if scale_by_tau:
        trans = trans * trace.tau
    return math.fsum(np.concatenate([state_rewards(head, structure, constants, err), trans]))
