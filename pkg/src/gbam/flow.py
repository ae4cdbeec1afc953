"""Small integer max-flow (Edmonds-Karp) for the loan feasibility network."""
from __future__ import annotations

from collections import deque


class FlowNetwork:
    def __init__(self, n_nodes: int):
        self.n = n_nodes
        self.cap = [dict() for _ in range(n_nodes)]
        self.flow = [dict() for _ in range(n_nodes)]

    def add_edge(self, u: int, v: int, capacity: int) -> None:
        if capacity < 0:
            raise ValueError("negative capacity")
        self.cap[u][v] = self.cap[u].get(v, 0) + capacity
        self.cap[v].setdefault(u, 0)
        self.flow[u].setdefault(v, 0)
        self.flow[v].setdefault(u, 0)

    def _residual(self, u: int, v: int) -> int:
        return self.cap[u][v] - self.flow[u][v]

    def max_flow(self, source: int, sink: int) -> int:
        total = 0
        while True:
            parent = [-1] * self.n
            parent[source] = source
            queue = deque([source])
            while queue and parent[sink] < 0:
                u = queue.popleft()
                for v in self.cap[u]:
                    if parent[v] < 0 and self._residual(u, v) > 0:
                        parent[v] = u
                        queue.append(v)
            if parent[sink] < 0:
                return total
            push = None
            v = sink
            while v != source:
                u = parent[v]
                r = self._residual(u, v)
                push = r if push is None else min(push, r)
                v = u
            v = sink
            while v != source:
                u = parent[v]
                self.flow[u][v] += push
                self.flow[v][u] -= push
                v = u
            total += push

    def flow_on(self, u: int, v: int) -> int:
        return max(0, self.flow[u].get(v, 0))
