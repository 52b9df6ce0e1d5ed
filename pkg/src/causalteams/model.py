"""Causal (multi)teams: values, structural-function tables, well-formedness,
explicit closures, subteam selection, and the JSON wire format.

A causal team couples a table of assignments (rows) with a DAG, per-variable
finite ranges, and partial extensional function tables for the endogenous
variables.  Proper values are opaque tokens (ints or strings); a `Term` is a
formal placeholder produced when an intervention needs a function value that
the team does not know.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

from .errors import (
    ConditionBViolation,
    ConditionCViolation,
    NotClassicalAntecedent,
    RangeViolation,
    SchemaError,
    UnknownVariable,
)
from .graph import Dag

RESERVED_NAME = "Key"

Proper = Union[int, str]


@dataclass(frozen=True)
class Term:
    """Formal function application standing for an unknown value.

    Terms compare and hash structurally; nested terms arise under iterated
    interventions on nonparametric teams.
    """

    symbol: str
    args: Tuple["Value", ...]

    def __repr__(self):
        inner = ",".join(repr(a) for a in self.args)
        return f"{self.symbol}({inner})"


Value = Union[Proper, Term]


def is_proper(v: Value) -> bool:
    return not isinstance(v, Term)


def term_symbol(variable: str) -> str:
    """Function-symbol name used for formal entries of `variable`."""
    return f"f_{variable}"


def value_sort_key(v: Value):
    """Total order over mixed int/str/Term values, for canonical output."""
    if isinstance(v, Term):
        return (2, repr(v))
    if isinstance(v, str):
        return (1, v)
    return (0, v)


@dataclass(frozen=True)
class FunctionTable:
    """Extensional (possibly partial) structural function of one variable.

    `parents` is the alphabetical list of graph parents; `table` maps
    argument tuples of proper values (one per parent, in that order) to a
    proper value in the variable's range.
    """

    variable: str
    parents: Tuple[str, ...]
    table: Mapping[Tuple[Value, ...], Value]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "table", dict(self.table))

    def __eq__(self, other):
        if not isinstance(other, FunctionTable):
            return NotImplemented
        return (
            self.variable == other.variable
            and self.parents == other.parents
            and self.table == other.table
        )

    def __hash__(self):
        items = tuple(sorted(self.table.items(), key=repr))
        return hash((self.variable, self.parents, items))

    def is_total_on(self, ranges: Mapping[str, Tuple[Proper, ...]]) -> bool:
        size = 1
        for p in self.parents:
            size *= len(ranges[p])
        return len(self.table) == size


@dataclass(frozen=True, eq=False)
class CausalTeam:
    """A causal (multi)team.

    `variables` is the alphabetically ordered domain; each row is a value
    tuple aligned with it, with a parallel multiplicity count (all 1 in set
    mode).  Equality and hashing are structural, with rows compared as a
    multiset.
    """

    variables: Tuple[str, ...]
    rows: Tuple[Tuple[Value, ...], ...]
    counts: Tuple[int, ...]
    edges: frozenset
    ranges: Dict[str, Tuple[Proper, ...]]
    functions: Dict[str, FunctionTable]
    multiteam: bool = False

    # -- structure -----------------------------------------------------------

    @cached_property
    def graph(self) -> Dag:
        return Dag(self.variables, self.edges)

    @cached_property
    def index(self) -> Dict[str, int]:
        return {v: i for i, v in enumerate(self.variables)}

    @cached_property
    def endogenous(self) -> Tuple[str, ...]:
        return self.graph.endogenous()

    def parents(self, v: str) -> Tuple[str, ...]:
        return self.graph.parents(v)

    def value(self, row: Tuple[Value, ...], var: str) -> Value:
        try:
            return row[self.index[var]]
        except KeyError:
            raise UnknownVariable(var) from None

    def column(self, var: str) -> Tuple[Value, ...]:
        i = self.index.get(var)
        if i is None:
            raise UnknownVariable(var)
        return tuple(row[i] for row in self.rows)

    @cached_property
    def distinct_rows(self) -> Tuple[Tuple[Value, ...], ...]:
        seen = {}
        for row in self.rows:
            seen.setdefault(row, None)
        return tuple(seen)

    @property
    def n_assignments(self) -> int:
        """Row count with multiplicity (cardinality of the support)."""
        return sum(self.counts)

    @property
    def is_empty(self) -> bool:
        return not self.rows

    def is_parametric(self) -> bool:
        return all(
            self.functions[v].is_total_on(self.ranges) for v in self.endogenous
        )

    def has_terms(self) -> bool:
        return any(not is_proper(v) for row in self.rows for v in row)

    # -- derived teams ---------------------------------------------------------

    def with_rows(self, rows, counts=None) -> "CausalTeam":
        """Same structure over a different row table (dedup in set mode)."""
        rows = list(rows)
        counts = [1] * len(rows) if counts is None else list(counts)
        if not self.multiteam:
            rows, counts = _dedup(rows)
        return CausalTeam(
            self.variables,
            tuple(rows),
            tuple(counts),
            self.edges,
            self.ranges,
            self.functions,
            self.multiteam,
        )

    def restrict(self, keep) -> "CausalTeam":
        """Causal subteam keeping the row positions selected by `keep`."""
        pairs = [(r, c) for i, (r, c) in enumerate(zip(self.rows, self.counts)) if keep(i)]
        return self.with_rows([r for r, _ in pairs], [c for _, c in pairs])

    def singleton(self, row: Tuple[Value, ...]) -> "CausalTeam":
        return self.with_rows([row], [1])

    # -- equality ----------------------------------------------------------------

    @cached_property
    def _key(self):
        row_multiset = Counter()
        for row, count in zip(self.rows, self.counts):
            row_multiset[row] += count
        return (
            self.variables,
            self.multiteam,
            self.edges,
            tuple(sorted((v, tuple(sorted(r, key=value_sort_key))) for v, r in self.ranges.items())),
            tuple(sorted(self.functions.items())),
            tuple(sorted(row_multiset.items(), key=repr)),
        )

    def __eq__(self, other):
        if not isinstance(other, CausalTeam):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)


def _dedup(rows):
    seen = {}
    for row in rows:
        seen.setdefault(row, None)
    kept = list(seen)
    return kept, [1] * len(kept)


# -- construction and validation -------------------------------------------------


def build_team(
    variables: Sequence[str],
    ranges: Mapping[str, Sequence[Proper]],
    edges: Sequence[Tuple[str, str]],
    functions: Mapping[str, Mapping[Tuple[Value, ...], Value]],
    rows: Sequence[Mapping[str, Value]],
    counts: Optional[Sequence[int]] = None,
    multiteam: bool = False,
    validate: bool = True,
) -> CausalTeam:
    """Assemble and (by default) validate a causal team from loose parts.

    `functions` maps endogenous variable names to arg-tuple -> value tables;
    argument tuples follow the alphabetical parent order.
    """
    names = sorted(variables)
    if len(set(names)) != len(names):
        raise SchemaError("duplicate variable name")
    for name in names:
        if not name or any(ch.isspace() for ch in name):
            raise SchemaError(f"bad variable name {name!r}")
        if name == RESERVED_NAME:
            raise SchemaError(f"variable name {RESERVED_NAME!r} is reserved")

    graph = Dag(tuple(names), frozenset(edges))  # raises on cycles / unknowns

    range_map = {}
    for name in names:
        if name not in ranges:
            raise SchemaError(f"no range for variable {name}")
        vals = list(ranges[name])
        if not vals:
            raise SchemaError(f"empty range for variable {name}")
        dedup = []
        for v in vals:
            if isinstance(v, Term):
                raise SchemaError("formal terms are not range elements")
            if v not in dedup:
                dedup.append(v)
        range_map[name] = tuple(dedup)

    endo = set(graph.endogenous())
    tables = {}
    for var, table in functions.items():
        if var not in endo:
            raise SchemaError(f"function given for non-endogenous variable {var}")
        tables[var] = FunctionTable(var, graph.parents(var), dict(table))
    for var in endo:
        tables.setdefault(var, FunctionTable(var, graph.parents(var), {}))

    row_tuples = []
    for assignment in rows:
        if set(assignment) != set(names):
            missing = set(names) - set(assignment)
            extra = set(assignment) - set(names)
            raise SchemaError(
                f"row must assign exactly the domain (missing {sorted(missing)}, "
                f"extra {sorted(extra)})"
            )
        row_tuples.append(tuple(assignment[v] for v in names))

    n = len(row_tuples)
    counts = [1] * n if counts is None else list(counts)
    if len(counts) != n:
        raise SchemaError("counts/rows length mismatch")
    for c in counts:
        if not isinstance(c, int) or c < 1:
            raise SchemaError(f"bad multiplicity {c!r}")
    if not multiteam:
        if any(c != 1 for c in counts):
            raise SchemaError("count must be 1 in set mode")
        row_tuples, counts = _dedup(row_tuples)

    team = CausalTeam(
        tuple(names),
        tuple(row_tuples),
        tuple(counts),
        frozenset(edges),
        range_map,
        tables,
        multiteam,
    )
    if validate:
        validate_team(team)
    return team


def validate_team(team: CausalTeam) -> None:
    """Check range membership, functional dependence of children on parents,
    and agreement of rows with the function tables."""
    for var in team.variables:
        ran = set(team.ranges[var])
        for row in team.rows:
            v = team.value(row, var)
            if is_proper(v) and v not in ran:
                raise RangeViolation(f"{var}={v!r} outside declared range")

    for var in team.endogenous:
        parents = team.parents(var)
        ft = team.functions[var]
        if ft.parents != parents:
            raise SchemaError(
                f"function for {var} indexed by {ft.parents}, graph parents are {parents}"
            )
        p_ran = [set(team.ranges[p]) for p in parents]
        for args, out in ft.table.items():
            if len(args) != len(parents):
                raise SchemaError(f"arity mismatch in table for {var}")
            for a, ran in zip(args, p_ran):
                if isinstance(a, Term) or a not in ran:
                    raise RangeViolation(f"table argument {a!r} outside range")
            if isinstance(out, Term) or out not in set(team.ranges[var]):
                raise RangeViolation(f"table value {out!r} outside range of {var}")

        seen = {}
        for row in team.rows:
            args = tuple(team.value(row, p) for p in parents)
            out = team.value(row, var)
            if not all(is_proper(a) for a in args) or not is_proper(out):
                continue
            if args in seen and seen[args] != out:
                raise ConditionBViolation(
                    f"rows with {parents}={args} give {var}={seen[args]!r} and {out!r}"
                )
            seen[args] = out
            if args in ft.table and ft.table[args] != out:
                raise ConditionCViolation(
                    f"row has {var}={out!r} but the function table gives "
                    f"{ft.table[args]!r} on {parents}={args}"
                )


# -- explicit closures ----------------------------------------------------------


def explicit_closure(team: CausalTeam) -> CausalTeam:
    """Extend every function table with the values readable off the rows.

    After closure, every row's parent tuple for an endogenous variable lies
    in the domain of that variable's table (when the relevant entries are
    proper values).  Idempotent; returns the input object unchanged when the
    tables already absorb every row.
    """
    new_tables = {}
    changed = False
    for var in team.endogenous:
        parents = team.parents(var)
        ft = team.functions[var]
        additions = {}
        for row in team.rows:
            args = tuple(team.value(row, p) for p in parents)
            out = team.value(row, var)
            if not all(is_proper(a) for a in args) or not is_proper(out):
                continue
            if args not in ft.table and args not in additions:
                additions[args] = out
        if additions:
            merged = dict(ft.table)
            merged.update(additions)
            new_tables[var] = FunctionTable(var, parents, merged)
            changed = True
        else:
            new_tables[var] = ft
    if not changed:
        return team
    return CausalTeam(
        team.variables,
        team.rows,
        team.counts,
        team.edges,
        team.ranges,
        new_tables,
        team.multiteam,
    )


def fully_explicit(team: CausalTeam) -> CausalTeam:
    """Explicit closure, with ranges understood to admit formal terms.

    Interventions on the result may emit `Term` values wherever a function
    lookup is undefined; no separate marker is needed because term emission
    is always available to the intervention algorithm.
    """
    return explicit_closure(team)


# -- subteam selection ------------------------------------------------------------


def term_error(var) -> "FormalTermEncountered":
    from .errors import FormalTermEncountered

    return FormalTermEncountered(
        f"formal term in column {var}; use the falsifiability or admissibility relation"
    )


def row_satisfies_classical(team: CausalTeam, row, formula) -> bool:
    """Single-row truth of a classical formula (atoms, & and | only)."""
    from . import syntax  # local import to avoid a cycle

    if isinstance(formula, syntax.Eq):
        v = team.value(row, formula.var)
        if not is_proper(v):
            raise term_error(formula.var)
        return v == formula.value
    if isinstance(formula, syntax.Neq):
        v = team.value(row, formula.var)
        if not is_proper(v):
            raise term_error(formula.var)
        return v != formula.value
    if isinstance(formula, syntax.And):
        return row_satisfies_classical(team, row, formula.left) and row_satisfies_classical(
            team, row, formula.right
        )
    if isinstance(formula, syntax.TensorOr):
        return row_satisfies_classical(team, row, formula.left) or row_satisfies_classical(
            team, row, formula.right
        )
    raise NotClassicalAntecedent(
        f"selection requires a classical formula, got {type(formula).__name__}"
    )


def select_subteam(team: CausalTeam, formula) -> CausalTeam:
    """Causal subteam of the explicit closure keeping exactly the rows whose
    singleton satisfies the classical selector; graph, ranges and functions
    are untouched."""
    from . import syntax

    if not syntax.is_classical(formula):
        raise NotClassicalAntecedent(
            "subteam selection takes a classical formula (V=v / V!=v, &, |)"
        )
    closed = explicit_closure(team)
    return closed.restrict(
        lambda i: row_satisfies_classical(closed, closed.rows[i], formula)
    )


# -- JSON wire format ----------------------------------------------------------------


def load_team(document: str) -> CausalTeam:
    """Parse and validate a team-file JSON document."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("team document must be a JSON object")

    mode = doc.get("mode", "set")
    if mode not in ("set", "multi"):
        raise SchemaError(f"mode must be 'set' or 'multi', got {mode!r}")
    multiteam = mode == "multi"

    var_specs = _expect(doc, "variables", list)
    names, ranges = [], {}
    for spec in var_specs:
        if not isinstance(spec, dict) or "name" not in spec or "range" not in spec:
            raise SchemaError("each variable needs 'name' and 'range'")
        name = spec["name"]
        if not isinstance(name, str):
            raise SchemaError("variable name must be a string")
        names.append(name)
        rng = spec["range"]
        if not isinstance(rng, list):
            raise SchemaError(f"range of {name} must be a list")
        for v in rng:
            if not isinstance(v, (int, str)) or isinstance(v, bool):
                raise SchemaError(f"range element {v!r} must be an int or string")
        ranges[name] = rng

    edges = []
    for e in doc.get("edges", []):
        if not isinstance(e, list) or len(e) != 2:
            raise SchemaError(f"edge {e!r} must be a [from, to] pair")
        edges.append((e[0], e[1]))

    functions = {}
    fun_doc = doc.get("functions", {})
    if not isinstance(fun_doc, dict):
        raise SchemaError("'functions' must be an object")
    parents_declared = {}
    for var, fspec in fun_doc.items():
        if not isinstance(fspec, dict):
            raise SchemaError(f"function spec for {var} must be an object")
        parents_declared[var] = tuple(fspec.get("parents", []))
        table = {}
        for entry in fspec.get("table", []):
            if not isinstance(entry, dict) or "args" not in entry or "value" not in entry:
                raise SchemaError("table entries need 'args' and 'value'")
            args = tuple(entry["args"])
            if args in table:
                raise SchemaError(f"duplicate table key {args!r} for {var}")
            table[args] = entry["value"]
        functions[var] = table

    rows, counts = [], []
    for rdoc in doc.get("rows", []):
        if not isinstance(rdoc, dict) or "values" not in rdoc:
            raise SchemaError("each row needs a 'values' object")
        values = rdoc["values"]
        if not isinstance(values, dict):
            raise SchemaError("'values' must map variables to values")
        for v in values.values():
            if isinstance(v, dict):
                raise SchemaError("formal terms never appear in input files")
        rows.append(values)
        counts.append(rdoc.get("count", 1))

    team = build_team(
        names, ranges, edges, functions, rows, counts, multiteam=multiteam
    )
    for var, declared in parents_declared.items():
        if var in team.functions and declared != team.functions[var].parents:
            raise SchemaError(
                f"'parents' of {var} must equal the alphabetical graph parents "
                f"{team.functions[var].parents}, got {declared}"
            )
    return team


def load_team_file(path) -> CausalTeam:
    with open(path, "r", encoding="utf-8") as fh:
        return load_team(fh.read())


def _expect(doc, key, kind):
    if key not in doc or not isinstance(doc[key], kind):
        raise SchemaError(f"missing or malformed {key!r}")
    return doc[key]


def _value_to_json(v: Value):
    if isinstance(v, Term):
        return {"term": v.symbol, "args": [_value_to_json(a) for a in v.args]}
    return v


def dump_team(team: CausalTeam) -> str:
    """Serialize a team canonically (stable field and row ordering)."""
    doc = {
        "mode": "multi" if team.multiteam else "set",
        "variables": [
            {"name": v, "range": list(team.ranges[v])} for v in team.variables
        ],
        "edges": sorted([list(e) for e in team.edges]),
        "functions": {
            var: {
                "parents": list(team.functions[var].parents),
                "table": [
                    {"args": list(args), "value": out}
                    for args, out in sorted(
                        team.functions[var].table.items(),
                        key=lambda kv: tuple(value_sort_key(a) for a in kv[0]),
                    )
                ],
            }
            for var in sorted(team.functions)
        },
        "rows": [
            {
                "values": {
                    v: _value_to_json(team.value(row, v)) for v in team.variables
                },
                "count": count,
            }
            for row, count in zip(team.rows, team.counts)
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def dump_team_file(team: CausalTeam, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_team(team))
