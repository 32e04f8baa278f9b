"""Small deterministic max-flow kernel.

Edmonds-Karp (BFS shortest augmenting paths) over adjacency lists. Capacities
may be ints, Fractions, or floats; arithmetic never leaves the caller's
numeric type. Graphs in this package have at most a few hundred nodes, so no
effort is spent on asymptotics. Augmentation order is fixed by edge insertion
order, which callers use to make allocations reproducible.

`zero` is the residual threshold: residual capacities at or below it count as
saturated (0 for exact arithmetic, a tiny scale-relative slack for floats).
"""

from __future__ import annotations

from collections import deque


class FlowNetwork:
    def __init__(self, n_nodes: int, zero=0):
        self.n_nodes = n_nodes
        self.adj = [[] for _ in range(n_nodes)]
        self.to = []
        self.residual = []
        self.zero = zero

    def add_edge(self, u: int, v: int, capacity) -> int:
        """Add a directed edge; returns its id. The reverse edge is id ^ 1."""
        eid = len(self.to)
        self.adj[u].append(eid)
        self.to.append(v)
        self.residual.append(capacity)
        self.adj[v].append(eid + 1)
        self.to.append(u)
        self.residual.append(0 * capacity)
        return eid

    def flow_on(self, eid: int):
        """Flow currently pushed through edge eid (= residual of its reverse)."""
        return self.residual[eid ^ 1]

    def _find_path(self, source: int, sink: int):
        parent_edge = [-1] * self.n_nodes
        parent_edge[source] = -2
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for eid in self.adj[u]:
                v = self.to[eid]
                if parent_edge[v] == -1 and self.residual[eid] > self.zero:
                    parent_edge[v] = eid
                    if v == sink:
                        return parent_edge
                    queue.append(v)
        return None

    def max_flow(self, source: int, sink: int):
        """Push flow until no augmenting path remains; returns the added value.

        May be called repeatedly (e.g. after adding edges); each call returns
        only the increment, so totals are the caller's bookkeeping.
        """
        total = 0 * self.zero if self.zero else 0
        while True:
            parent_edge = self._find_path(source, sink)
            if parent_edge is None:
                return total
            bottleneck = None
            v = sink
            while v != source:
                eid = parent_edge[v]
                r = self.residual[eid]
                if bottleneck is None or r < bottleneck:
                    bottleneck = r
                v = self.to[eid ^ 1]
            v = sink
            while v != source:
                eid = parent_edge[v]
                self.residual[eid] -= bottleneck
                self.residual[eid ^ 1] += bottleneck
                v = self.to[eid ^ 1]
            total += bottleneck

    def reachable_from(self, source: int):
        """Nodes reachable through positive residuals; after max_flow this is
        the source side of a minimum cut."""
        seen = [False] * self.n_nodes
        seen[source] = True
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for eid in self.adj[u]:
                v = self.to[eid]
                if not seen[v] and self.residual[eid] > self.zero:
                    seen[v] = True
                    queue.append(v)
        return seen
