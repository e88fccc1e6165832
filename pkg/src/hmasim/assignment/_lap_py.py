"""Pure-Python Jonker-Volgenant shortest augmenting path solver.

Reference implementation and fallback for the compiled ``_lapjv`` module;
both must produce identical assignments.
"""
from __future__ import annotations

import json
import math

INF = math.inf


class Infeasible(Exception):
    def __init__(self, row):
        super().__init__(row)
        self.row = row


def lap_min(cost, trace=None):
    """Minimise over an R x C list-of-lists (R <= C, entries >= 0 or inf).

    Rows are augmented in index order. In each Dijkstra step the column
    with the smallest tentative distance is scanned next, lowest column
    index first on ties.

    Returns ``(col4row, u, v)``. Raises :class:`Infeasible` with the row
    being augmented when no finite augmenting path exists.
    """
    nr = len(cost)
    nc = len(cost[0]) if nr else 0
    u = [0.0] * nr
    v = [0.0] * nc
    col4row = [-1] * nr
    row4col = [-1] * nc

    for cur_row in range(nr):
        shortest = [INF] * nc
        path = [-1] * nc
        scanned_col = [False] * nc
        scanned_rows = []
        min_val = 0.0
        i = cur_row
        sink = -1
        while sink < 0:
            scanned_rows.append(i)
            crow = cost[i]
            ui = u[i]
            lowest = INF
            index = -1
            for j in range(nc):
                if scanned_col[j]:
                    continue
                r = min_val + crow[j] - ui - v[j]
                if r < shortest[j]:
                    path[j] = i
                    shortest[j] = r
                if shortest[j] < lowest:
                    lowest = shortest[j]
                    index = j
            if index < 0 or lowest == INF:
                raise Infeasible(cur_row)
            min_val = lowest
            scanned_col[index] = True
            if row4col[index] < 0:
                sink = index
            else:
                i = row4col[index]

        # dual update
        u[cur_row] += min_val
        for i in scanned_rows[1:]:
            u[i] += min_val - shortest[col4row[i]]
        for j in range(nc):
            if scanned_col[j]:
                v[j] -= min_val - shortest[j]

        j = sink
        chain = []
        while True:
            i = path[j]
            chain.append((i, j))
            row4col[j] = i
            col4row[i], j = j, col4row[i]
            if i == cur_row:
                break
        if trace is not None:
            trace.write(
                json.dumps(
                    {
                        "row": cur_row,
                        "sink": sink,
                        "path_length": min_val,
                        "augmenting_path": chain[::-1],
                        "u": u,
                        "v": v,
                    }
                )
                + "\n"
            )
    return col4row, u, v
