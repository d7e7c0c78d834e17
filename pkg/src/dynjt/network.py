"""Discrete belief networks and their line-oriented text format.

File format (UTF-8, ``#`` starts a comment)::

    var <name> <cardinality>
    cpt <child> [<parent1> ... <parentk>] : <p1> ... <pm>

All ``var`` lines come before any ``cpt`` line and declaration order fixes
the variable ids. A CPT table is laid out with the parent instantiation as
the major index (first listed parent most significant) and the child state
as the minor index.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
ROW_TOL = 1e-9


class NetworkError(ValueError):
    """Raised for malformed networks and network files."""


class NetworkSyntaxError(NetworkError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    cardinality: int


@dataclass(frozen=True)
class Cpt:
    child: int
    parents: Tuple[int, ...]
    table: Tuple[float, ...]


@dataclass(frozen=True)
class BeliefNetwork:
    """A DAG of discrete variables with one CPT per variable.

    Instances are immutable; use :func:`make_network` to build a checked one.
    """

    variables: Tuple[Variable, ...]
    cpts: Tuple[Cpt, ...]
    _children: Tuple[Tuple[int, ...], ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        children: List[List[int]] = [[] for _ in self.variables]
        for cpt in self.cpts:
            for p in cpt.parents:
                if 0 <= p < len(children):
                    children[p].append(cpt.child)
        object.__setattr__(
            self, "_children", tuple(tuple(sorted(c)) for c in children)
        )

    @property
    def n(self) -> int:
        return len(self.variables)

    def card(self, i: int) -> int:
        return self.variables[i].cardinality

    def parents(self, i: int) -> Tuple[int, ...]:
        return self.cpts[i].parents

    def children(self, i: int) -> Tuple[int, ...]:
        return self._children[i]

    def edges(self) -> List[Tuple[int, int]]:
        """Directed (parent, child) edges ordered by child, then parent order."""
        return [(p, c.child) for c in self.cpts for p in c.parents]

    def index(self, name: str) -> int:
        for v in self.variables:
            if v.name == name:
                return v.id
        raise NetworkError(f"unknown variable {name!r}")

    def names(self, ids: Iterable[int]) -> List[str]:
        return [self.variables[i].name for i in ids]

    def roots(self) -> List[int]:
        return [i for i in range(self.n) if not self.parents(i)]

    def leaves(self) -> List[int]:
        return [i for i in range(self.n) if not self.children(i)]

    def topological_order(self) -> List[int]:
        order = _topological_order(self)
        if order is None:
            raise NetworkError("network contains a directed cycle")
        return order


Instantiation = Dict[int, int]


def family(net: BeliefNetwork, i: int) -> frozenset:
    """The node ``i`` together with its parents."""
    if not 0 <= i < net.n:
        raise NetworkError(f"unknown variable id {i}")
    return frozenset((i,) + net.parents(i))


def _topological_order(net: BeliefNetwork):
    indeg = [len(set(c.parents)) for c in net.cpts]
    ready = [i for i, d in enumerate(indeg) if d == 0]
    order = []
    while ready:
        i = ready.pop()
        order.append(i)
        for c in net.children(i):
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return order if len(order) == net.n else None


def validate_network(net: BeliefNetwork) -> List[str]:
    """Return a list of invariant violations; empty means valid."""
    problems = []
    names = set()
    for pos, v in enumerate(net.variables):
        if v.id != pos:
            problems.append(f"variable {v.name!r} has id {v.id}, expected {pos}")
        if v.name in names:
            problems.append(f"duplicate variable name {v.name!r}")
        names.add(v.name)
        if not NAME_RE.match(v.name):
            problems.append(f"illegal variable name {v.name!r}")
        if v.cardinality < 2:
            problems.append(f"variable {v.name!r} has cardinality {v.cardinality} < 2")
    if len(net.cpts) != net.n:
        problems.append(f"{len(net.cpts)} CPTs for {net.n} variables")
        return problems

    structural_ok = True
    for pos, cpt in enumerate(net.cpts):
        label = net.variables[pos].name
        if cpt.child != pos:
            problems.append(f"CPT at position {pos} is for child {cpt.child}")
            structural_ok = False
            continue
        if any(not 0 <= p < net.n for p in cpt.parents):
            problems.append(f"CPT of {label!r} references an unknown parent")
            structural_ok = False
            continue
        if len(set(cpt.parents)) != len(cpt.parents):
            problems.append(f"CPT of {label!r} lists a parent twice")
        if pos in cpt.parents:
            problems.append(f"{label!r} is its own parent")
            structural_ok = False
        ck = max(net.card(pos), 1)
        rows = math.prod(net.card(p) for p in cpt.parents)
        if len(cpt.table) != ck * rows:
            problems.append(
                f"CPT of {label!r} has {len(cpt.table)} entries, expected {ck * rows}"
            )
            continue
        if any(not (0.0 <= x <= 1.0) for x in cpt.table):
            problems.append(f"CPT of {label!r} has an entry outside [0, 1]")
        for r in range(rows):
            s = math.fsum(cpt.table[r * ck:(r + 1) * ck])
            if abs(s - 1.0) > ROW_TOL:
                problems.append(f"CPT of {label!r} row {r} sums to {s!r}")
                break
    if structural_ok and _topological_order(net) is None:
        problems.append("parent relation contains a directed cycle")
    return problems


def make_network(
    variables: Sequence[Tuple[str, int]],
    cpts: Mapping[str, Tuple[Sequence[str], Sequence[float]]],
) -> BeliefNetwork:
    """Build and validate a network from names.

    ``variables`` is a list of ``(name, cardinality)``; ``cpts`` maps each
    child name to ``(parent names, flat table)``.
    """
    ids = {name: i for i, (name, _) in enumerate(variables)}
    vs = tuple(Variable(i, name, card) for i, (name, card) in enumerate(variables))
    out = []
    for name, _ in variables:
        if name not in cpts:
            raise NetworkError(f"no CPT for {name!r}")
        parents, table = cpts[name]
        try:
            pids = tuple(ids[p] for p in parents)
        except KeyError as exc:
            raise NetworkError(f"unknown variable {exc.args[0]!r}") from None
        out.append(Cpt(ids[name], pids, tuple(float(x) for x in table)))
    net = BeliefNetwork(vs, tuple(out))
    problems = validate_network(net)
    if problems:
        raise NetworkError("; ".join(problems))
    return net


def parse_network(text: str) -> BeliefNetwork:
    """Parse the text format into a validated :class:`BeliefNetwork`."""
    variables: List[Variable] = []
    ids: Dict[str, int] = {}
    cpts: Dict[int, Cpt] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = _tokenize(line)
        if not tokens:
            continue
        (col, head) = tokens[0]
        if head == "var":
            if cpts:
                raise NetworkSyntaxError("'var' after 'cpt'", lineno, col)
            if len(tokens) != 3:
                raise NetworkSyntaxError("expected 'var <name> <cardinality>'", lineno, col)
            ncol, name = tokens[1]
            if not NAME_RE.match(name):
                raise NetworkSyntaxError(f"illegal name {name!r}", lineno, ncol)
            if name in ids:
                raise NetworkSyntaxError(f"duplicate variable {name!r}", lineno, ncol)
            ccol, ctext = tokens[2]
            try:
                card = int(ctext)
            except ValueError:
                raise NetworkSyntaxError(f"bad cardinality {ctext!r}", lineno, ccol) from None
            if card < 2:
                raise NetworkSyntaxError("cardinality must be >= 2", lineno, ccol)
            ids[name] = len(variables)
            variables.append(Variable(len(variables), name, card))
        elif head == "cpt":
            cpt = _parse_cpt(tokens, ids, variables, lineno)
            if cpt.child in cpts:
                raise NetworkSyntaxError(
                    f"second CPT for {variables[cpt.child].name!r}", lineno, col
                )
            cpts[cpt.child] = cpt
        else:
            raise NetworkSyntaxError(f"unknown directive {head!r}", lineno, col)

    missing = [v.name for v in variables if v.id not in cpts]
    if missing:
        raise NetworkError(f"no CPT for {', '.join(missing)}")
    net = BeliefNetwork(tuple(variables), tuple(cpts[i] for i in range(len(variables))))
    problems = validate_network(net)
    if problems:
        raise NetworkError("; ".join(problems))
    return net


def _tokenize(line: str) -> List[Tuple[int, str]]:
    # '[', ']' and ':' are tokens on their own even when glued to neighbours
    return [
        (m.start() + 1, m.group())
        for m in re.finditer(r"[\[\]:]|[^\s\[\]:]+", line)
    ]


def _parse_cpt(tokens, ids, variables, lineno) -> Cpt:
    col = tokens[0][0]
    if len(tokens) < 2:
        raise NetworkSyntaxError("expected child name", lineno, col)
    ccol, child = tokens[1]
    if child not in ids:
        raise NetworkSyntaxError(f"unknown variable {child!r}", lineno, ccol)
    if len(tokens) < 3 or tokens[2][1] != "[":
        where = tokens[2][0] if len(tokens) > 2 else ccol + len(child)
        raise NetworkSyntaxError("expected '['", lineno, where)
    pos = 3
    parents = []
    while pos < len(tokens) and tokens[pos][1] != "]":
        pcol, pname = tokens[pos]
        if pname not in ids:
            raise NetworkSyntaxError(f"unknown variable {pname!r}", lineno, pcol)
        parents.append(ids[pname])
        pos += 1
    if pos >= len(tokens):
        raise NetworkSyntaxError("missing ']'", lineno, tokens[-1][0])
    pos += 1
    if pos >= len(tokens) or tokens[pos][1] != ":":
        raise NetworkSyntaxError("expected ':'", lineno, tokens[min(pos, len(tokens) - 1)][0])
    pos += 1
    values = []
    for vcol, text in tokens[pos:]:
        try:
            values.append(float(text))
        except ValueError:
            raise NetworkSyntaxError(f"bad probability {text!r}", lineno, vcol) from None
    cid = ids[child]
    expected = variables[cid].cardinality * math.prod(
        variables[p].cardinality for p in parents
    )
    if len(values) != expected:
        raise NetworkError(
            f"line {lineno}: CPT of {child!r} has {len(values)} entries, expected {expected}"
        )
    return Cpt(cid, tuple(parents), tuple(values))


def serialize_network(net: BeliefNetwork) -> str:
    lines = [f"var {v.name} {v.cardinality}" for v in net.variables]
    for cpt in net.cpts:
        parents = " ".join(net.names(cpt.parents))
        values = " ".join(format(x, ".17g") for x in cpt.table)
        lines.append(f"cpt {net.variables[cpt.child].name} [{parents}] : {values}")
    return "\n".join(lines) + "\n"


def read_network(path) -> BeliefNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


def write_network(net: BeliefNetwork, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_network(net))
