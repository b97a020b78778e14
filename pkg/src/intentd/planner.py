"""8-connected grid path planning on an inflated occupancy grid.

Straight moves cost one cell resolution, diagonal moves resolution*sqrt(2),
and a diagonal is blocked when either orthogonal neighbor is occupied (no
corner cutting). Costs are tracked as integer (straight, diagonal) move
counts and converted to meters by one shared expression, so A*, Dijkstra
distance fields, and any oracle over the same grid agree bit-for-bit.
"""

from __future__ import annotations

import heapq
import math
from typing import Optional

import numpy as np

from .world import ObstacleMap, rasterize

SQRT2 = math.sqrt(2.0)


class UnreachableGoalError(ValueError):
    """No path exists between the requested endpoints."""


class InvalidEndpointError(ValueError):
    """An endpoint lies in (inflated) occupied space or outside the map."""


def moves_to_meters(n_straight: int, n_diagonal: int, resolution: float) -> float:
    return n_straight * resolution + n_diagonal * (resolution * SQRT2)


_STRAIGHT = ((1, 0), (-1, 0), (0, 1), (0, -1))
_DIAGONAL = ((1, 1), (1, -1), (-1, 1), (-1, -1))


class GridPlanner:
    """Shareable, immutable planner over one scenario map."""

    def __init__(self, omap: ObstacleMap, inflation_radius: float = 0.3):
        if inflation_radius < 0:
            raise ValueError("inflation_radius must be non-negative")
        self.map = omap
        self.inflation_radius = inflation_radius
        r = inflation_radius
        w, h = omap.bounds
        inflated = []
        for ox, oy, ow, oh in omap.obstacles:
            # dilate by r, clipped back into the map so rasterize() accepts it
            x0, y0 = max(0.0, ox - r), max(0.0, oy - r)
            x1, y1 = min(w, ox + ow + r), min(h, oy + oh + r)
            inflated.append((x0, y0, x1 - x0, y1 - y0))
        self.occupied = rasterize(omap.bounds, tuple(inflated), omap.resolution)
        self.occupied.setflags(write=False)

    @property
    def resolution(self) -> float:
        return self.map.resolution

    @property
    def max_path_length(self) -> float:
        """Penalty length substituted for unreachable goals: 10x map diagonal."""
        w, h = self.map.bounds
        return 10.0 * math.hypot(w, h)

    def is_blocked(self, p: tuple[float, float]) -> bool:
        """True when p is outside the map or in inflated-occupied space."""
        if not self.map.in_bounds(p):
            return True
        return bool(self.occupied[self.map.cell_of(p)])

    def _check_endpoint(self, p: tuple[float, float], name: str) -> tuple[int, int]:
        if not self.map.in_bounds(p):
            raise InvalidEndpointError(f"{name} point {p} outside map bounds {self.map.bounds}")
        cell = self.map.cell_of(p)
        if self.occupied[cell]:
            raise InvalidEndpointError(f"{name} point {p} lies in inflated-occupied space")
        return cell

    def _neighbors(self, cell: tuple[int, int]):
        nx, ny = self.occupied.shape
        x, y = cell
        occ = self.occupied
        for dx, dy in _STRAIGHT:
            cx, cy = x + dx, y + dy
            if 0 <= cx < nx and 0 <= cy < ny and not occ[cx, cy]:
                yield (cx, cy), False
        for dx, dy in _DIAGONAL:
            cx, cy = x + dx, y + dy
            if not (0 <= cx < nx and 0 <= cy < ny) or occ[cx, cy]:
                continue
            if occ[x + dx, y] or occ[x, y + dy]:
                continue  # no corner cutting
            yield (cx, cy), True

    def _octile(self, a: tuple[int, int], b: tuple[int, int]) -> float:
        dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
        lo = min(dx, dy)
        return moves_to_meters(dx + dy - 2 * lo, lo, self.resolution)

    def _astar(self, start: tuple[int, int], goal: tuple[int, int]):
        """A* over cells; returns ((n_straight, n_diagonal), came_from) or None."""
        g_best: dict[tuple[int, int], tuple[int, int]] = {start: (0, 0)}
        came: dict[tuple[int, int], tuple[int, int]] = {}
        counter = 0
        res = self.resolution
        frontier = [(self._octile(start, goal), counter, start)]
        closed = set()
        while frontier:
            _, _, cur = heapq.heappop(frontier)
            if cur in closed:
                continue
            if cur == goal:
                return g_best[cur], came
            closed.add(cur)
            ns, nd = g_best[cur]
            for nxt, diag in self._neighbors(cur):
                if nxt in closed:
                    continue
                cand = (ns, nd + 1) if diag else (ns + 1, nd)
                cand_m = moves_to_meters(cand[0], cand[1], res)
                old = g_best.get(nxt)
                if old is None or cand_m < moves_to_meters(old[0], old[1], res):
                    g_best[nxt] = cand
                    came[nxt] = cur
                    counter += 1
                    heapq.heappush(
                        frontier, (cand_m + self._octile(nxt, goal), counter, nxt))
        return None

    def path_length(self, start: tuple[float, float], goal: tuple[float, float]) -> float:
        """Optimal 8-connected path cost in meters between two free points."""
        s = self._check_endpoint(start, "start")
        g = self._check_endpoint(goal, "goal")
        if s == g:
            return 0.0
        result = self._astar(s, g)
        if result is None:
            raise UnreachableGoalError(f"no path from {start} to {goal}")
        (ns, nd), _ = result
        return moves_to_meters(ns, nd, self.resolution)

    def plan_path(
        self, start: tuple[float, float], goal: tuple[float, float]
    ) -> list[tuple[float, float]]:
        """Waypoint list (cell centers, then the exact goal point) along an optimal path."""
        s = self._check_endpoint(start, "start")
        g = self._check_endpoint(goal, "goal")
        if s == g:
            return [start, goal]
        result = self._astar(s, g)
        if result is None:
            raise UnreachableGoalError(f"no path from {start} to {goal}")
        _, came = result
        cells = [g]
        while cells[-1] != s:
            cells.append(came[cells[-1]])
        cells.reverse()
        pts = [self.map.cell_center(c) for c in cells]
        pts.append(goal)
        return pts

    def distance_field(self, goal: tuple[float, float]) -> np.ndarray:
        """Optimal cost in meters from every free cell to the goal (inf elsewhere).

        Dijkstra over the same move set as A*; field values match
        path_length() exactly.
        """
        g = self._check_endpoint(goal, "goal")
        res = self.resolution
        nx, ny = self.occupied.shape
        best: dict[tuple[int, int], tuple[int, int]] = {g: (0, 0)}
        done = np.zeros((nx, ny), dtype=bool)
        field = np.full((nx, ny), np.inf)
        counter = 0
        frontier = [(0.0, counter, g)]
        while frontier:
            cost, _, cur = heapq.heappop(frontier)
            if done[cur]:
                continue
            done[cur] = True
            field[cur] = cost
            ns, nd = best[cur]
            for nxt, diag in self._neighbors(cur):
                if done[nxt]:
                    continue
                cand = (ns, nd + 1) if diag else (ns + 1, nd)
                cand_m = moves_to_meters(cand[0], cand[1], res)
                old = best.get(nxt)
                if old is None or cand_m < moves_to_meters(old[0], old[1], res):
                    best[nxt] = cand
                    counter += 1
                    heapq.heappush(frontier, (cand_m, counter, nxt))
        field.setflags(write=False)
        return field

    def field_lookup(self, field: np.ndarray, p: tuple[float, float]) -> float:
        """Distance-field value at a world point; unreachable maps to max_path_length."""
        if not self.map.in_bounds(p):
            return self.max_path_length
        v = float(field[self.map.cell_of(p)])
        return v if math.isfinite(v) else self.max_path_length
