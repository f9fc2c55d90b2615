"""Precedent/dependent graph over workbook cells.

Nodes are canonical addresses (sheet filled in, no absolute flags).  Every
formula cell is a node; every cell a formula reads -- directly or through a
range, populated or empty -- is a node with an edge into the formula.
Formula cells that failed to parse contribute no edges.  The graph is
immutable once built and safe to query from multiple threads.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .addresses import CellAddress, expand_range
from .formula_ast import RangeRef, extract_refs
from .model import Workbook


@dataclass
class DepGraph:
    nodes: set[CellAddress] = field(default_factory=set)
    # dependent -> precedents it reads, deduped, in sorted order
    precedents: dict[CellAddress, tuple[CellAddress, ...]] = field(default_factory=dict)
    # precedent -> formula cells that read it, deduped, in sorted order
    dependents: dict[CellAddress, tuple[CellAddress, ...]] = field(default_factory=dict)

    def precedents_of(self, addr: CellAddress) -> tuple[CellAddress, ...]:
        return self.precedents.get(addr, ())

    def dependents_of(self, addr: CellAddress) -> tuple[CellAddress, ...]:
        return self.dependents.get(addr, ())


def build_graph(wb: Workbook) -> DepGraph:
    """Derive the cell dependency graph; range references expand per cell."""
    nodes: set[CellAddress] = set()
    pre: dict[CellAddress, set[CellAddress]] = {}
    dep: dict[CellAddress, set[CellAddress]] = {}
    for addr, content in wb.formula_cells():
        node = addr.resolved(addr.sheet)
        nodes.add(node)
        if content.formula_ast is None:
            continue
        for ref in extract_refs(content.formula_ast):
            if isinstance(ref, RangeRef):
                cells = expand_range(
                    ref.start.resolved(node.sheet), ref.end.resolved(node.sheet)
                )
            else:
                cells = [ref.resolved(node.sheet)]
            for precedent in cells:
                nodes.add(precedent)
                pre.setdefault(node, set()).add(precedent)
                dep.setdefault(precedent, set()).add(node)
    return DepGraph(
        nodes,
        {d: tuple(sorted(ps, key=lambda a: a.key)) for d, ps in pre.items()},
        {p: tuple(sorted(ds, key=lambda a: a.key)) for p, ds in dep.items()},
    )


def _strongly_connected(
    nodes: list[CellAddress], succ: dict[CellAddress, tuple[CellAddress, ...]]
) -> list[list[CellAddress]]:
    """Tarjan's algorithm, iterative so deep chains cannot overflow the stack."""
    index_of: dict[CellAddress, int] = {}
    low: dict[CellAddress, int] = {}
    on_stack: set[CellAddress] = set()
    stack: list[CellAddress] = []
    components: list[list[CellAddress]] = []
    counter = 0

    for start in nodes:
        if start in index_of:
            continue
        index_of[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        path = [(start, iter(succ.get(start, ())))]
        while path:
            node, children = path[-1]
            advanced = False
            for child in children:
                if child not in index_of:
                    index_of[child] = low[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    path.append((child, iter(succ.get(child, ()))))
                    advanced = True
                    break
                if child in on_stack and index_of[child] < low[node]:
                    low[node] = index_of[child]
            if advanced:
                continue
            path.pop()
            if path:
                parent = path[-1][0]
                if low[node] < low[parent]:
                    low[parent] = low[node]
            if low[node] == index_of[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.remove(member)
                    component.append(member)
                    if member == node:
                        break
                components.append(component)
    return components


def find_cycles(graph: DepGraph) -> list[list[CellAddress]]:
    """Circular-reference groups, each reported exactly once.

    Every strongly connected component of two or more cells is one group,
    and every self-referencing cell is its own group.  Cells within a group
    and groups themselves are ordered lexicographically by (sheet, col,
    row).
    """
    ordered = sorted(graph.nodes, key=lambda a: a.key)
    cycles: list[list[CellAddress]] = []
    for component in _strongly_connected(ordered, graph.dependents):
        if len(component) > 1:
            cycles.append(sorted(component, key=lambda a: a.key))
    for node in ordered:
        if node in graph.precedents_of(node):
            cycles.append([node])
    cycles.sort(key=lambda cyc: (cyc[0].key, len(cyc)))
    return cycles


def topo_order(graph: DepGraph) -> tuple[list[CellAddress], list[list[CellAddress]]]:
    """Evaluation order plus the cycles that had to be left out.

    Cells in cycles are excluded from the order; everything else is listed
    with precedents ahead of dependents.  Ties resolve row-major per sheet,
    so the order is deterministic.
    """
    cycles = find_cycles(graph)
    in_cycle = {addr for cycle in cycles for addr in cycle}
    indegree: dict[CellAddress, int] = {}
    for node in graph.nodes:
        if node in in_cycle:
            continue
        indegree[node] = sum(
            1 for p in graph.precedents_of(node) if p not in in_cycle
        )
    ready = [(n.sheet, n.row, n.col, n) for n, deg in indegree.items() if deg == 0]
    heapq.heapify(ready)
    order: list[CellAddress] = []
    while ready:
        *_, node = heapq.heappop(ready)
        order.append(node)
        for dependent in graph.dependents_of(node):
            if dependent in in_cycle:
                continue
            indegree[dependent] -= 1
            if indegree[dependent] == 0:
                heapq.heappush(ready, (dependent.sheet, dependent.row, dependent.col, dependent))
    return order, cycles
