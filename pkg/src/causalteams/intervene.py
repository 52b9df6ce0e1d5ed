"""The do(X=x) intervention on recursive causal teams.

The algorithm first absorbs all row-readable function values into the tables
(the fully-explicit closure), then pins the intervened columns, removes their
incoming arrows, and recomputes the remaining columns stage by stage in order
of increasing evaluation distance.  Where a function lookup is undefined the
entry is filled with a formal `Term` capturing the current argument values,
which may themselves be terms under iterated interventions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

from .errors import InconsistentSpec, RangeViolation, UnknownVariable
from .graph import eval_distances, remove_incoming
from .model import (
    CausalTeam,
    FunctionTable,
    Term,
    Value,
    fully_explicit,
    is_proper,
    term_symbol,
)


@dataclass(frozen=True)
class InterventionSpec:
    """Bindings of an intervention; repeated variables must agree."""

    bindings: Tuple[Tuple[str, Value], ...]

    @staticmethod
    def of(*pairs, **kwargs) -> "InterventionSpec":
        items = list(pairs) + sorted(kwargs.items())
        return InterventionSpec(tuple(items))

    def is_consistent(self) -> bool:
        seen: Dict[str, Value] = {}
        for var, val in self.bindings:
            if var in seen and seen[var] != val:
                return False
            seen[var] = val
        return True

    def as_dict(self) -> Dict[str, Value]:
        if not self.is_consistent():
            raise InconsistentSpec(f"inconsistent bindings {self.bindings}")
        return dict(self.bindings)


def do_intervention(team: CausalTeam, spec) -> CausalTeam:
    """Return the intervened team T_{X=x}.

    `spec` may be an InterventionSpec, a mapping, or a sequence of
    (variable, value) pairs.  Refuses inconsistent specs; out-of-range and
    unknown variables are rejected.  In set mode the resulting rows are
    deduplicated (only after the final stage); in multiteam mode every
    original row keeps its multiplicity.
    """
    if isinstance(spec, InterventionSpec):
        bindings = spec.as_dict()
    elif isinstance(spec, dict):
        bindings = dict(spec)
    else:
        bindings = InterventionSpec(tuple(spec)).as_dict()

    for var, val in bindings.items():
        if var not in team.index:
            raise UnknownVariable(var)
        if not is_proper(val):
            raise RangeViolation("interventions assign proper values only")
        if val not in team.ranges[var]:
            raise RangeViolation(f"{var}={val!r} outside declared range")

    return _do_cached(team, tuple(sorted(bindings.items(), key=repr)))


_cache: Dict[Tuple[CausalTeam, tuple], CausalTeam] = {}
_CACHE_MAX = 100_000


def clear_cache() -> None:
    _cache.clear()


def _do_cached(team: CausalTeam, bindings: tuple) -> CausalTeam:
    key = (team, bindings)
    hit = _cache.get(key)
    if hit is not None:
        return hit
    result = _do(team, dict(bindings))
    if len(_cache) < _CACHE_MAX:
        _cache[key] = result
    return result


def _do(team: CausalTeam, bindings: Dict[str, Value]) -> CausalTeam:
    if not bindings:
        return fully_explicit(team)

    # Step -1: make every row-readable function value available.
    team = fully_explicit(team)
    intervened = set(bindings)

    # Stage 0: prune arrows into the intervened set, pin the columns, and
    # restrict the functional component to the still-endogenous variables.
    graph = remove_incoming(team.graph, intervened)
    functions = {
        var: ft for var, ft in team.functions.items() if var not in intervened
    }
    idx = team.index
    rows = [list(row) for row in team.rows]
    for var, val in bindings.items():
        i = idx[var]
        for row in rows:
            row[i] = val

    # Stages 1..n: recompute by increasing evaluation distance.
    distances = eval_distances(team.graph, intervened)
    schedule: Dict[int, list] = {}
    for var, d in distances.items():
        if d >= 1:
            schedule.setdefault(d, []).append(var)

    for d in sorted(schedule):
        for var in sorted(schedule[d]):
            ft = functions[var]
            parent_idx = [idx[p] for p in ft.parents]
            i = idx[var]
            for row in rows:
                args = tuple(row[j] for j in parent_idx)
                if all(is_proper(a) for a in args) and args in ft.table:
                    row[i] = ft.table[args]
                else:
                    row[i] = Term(term_symbol(var), args)

    new_rows = [tuple(row) for row in rows]
    counts = list(team.counts)
    if not team.multiteam:
        seen = {}
        for row in new_rows:
            seen.setdefault(row, None)
        new_rows = list(seen)
        counts = [1] * len(new_rows)

    return CausalTeam(
        team.variables,
        tuple(new_rows),
        tuple(counts),
        graph.edges,
        team.ranges,
        functions,
        team.multiteam,
    )
