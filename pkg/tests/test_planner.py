import heapq
import math

import numpy as np
import pytest

from intentd.planner import (
    SQRT2,
    GridPlanner,
    InvalidEndpointError,
    UnreachableGoalError,
    moves_to_meters,
)
from intentd.world import ObstacleMap


def dijkstra_oracle(occ, start, goal, resolution):
    """Reference optimal cost: plain Dijkstra, no heuristic, own neighbor logic.

    Tracks (straight, diagonal) move counts and converts to meters the same
    shared way, so agreement with A* is exact.
    """
    nx, ny = occ.shape
    if occ[start] or occ[goal]:
        raise ValueError("endpoints must be free")
    best = {start: (0, 0)}
    visited = set()
    heap = [(0.0, 0, start)]
    tie = 0
    while heap:
        cost, _, cur = heapq.heappop(heap)
        if cur in visited:
            continue
        visited.add(cur)
        if cur == goal:
            ns, nd = best[cur]
            return moves_to_meters(ns, nd, resolution)
        x, y = cur
        ns, nd = best[cur]
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                cx, cy = x + dx, y + dy
                if not (0 <= cx < nx and 0 <= cy < ny) or occ[cx, cy]:
                    continue
                diagonal = dx != 0 and dy != 0
                if diagonal and (occ[x + dx, y] or occ[x, y + dy]):
                    continue
                cand = (ns, nd + 1) if diagonal else (ns + 1, nd)
                m = moves_to_meters(cand[0], cand[1], resolution)
                old = best.get((cx, cy))
                if old is None or m < moves_to_meters(old[0], old[1], resolution):
                    best[(cx, cy)] = cand
                    tie += 1
                    heapq.heappush(heap, (m, tie, (cx, cy)))
    return None


def random_grid_planner(rng, n=30, density=0.25):
    cells = rng.random((n, n)) < density
    obstacles = tuple(
        (float(i), float(j), 1.0, 1.0) for i in range(n) for j in range(n) if cells[i, j]
    )
    omap = ObstacleMap(bounds=(float(n), float(n)), obstacles=obstacles, resolution=1.0)
    return GridPlanner(omap, inflation_radius=0.0)


class TestPathLength:
    def test_straight_corridor(self):
        planner = GridPlanner(ObstacleMap((10.0, 10.0)), inflation_radius=0.0)
        assert planner.path_length((1.0, 1.0), (1.0, 5.0)) == pytest.approx(4.0, abs=0.1)

    def test_pure_diagonal(self):
        planner = GridPlanner(ObstacleMap((10.0, 10.0)), inflation_radius=0.0)
        assert planner.path_length((1.0, 1.0), (5.0, 5.0)) == pytest.approx(
            4 * SQRT2, abs=0.15)

    def test_same_cell_zero(self):
        planner = GridPlanner(ObstacleMap((10.0, 10.0)))
        assert planner.path_length((1.0, 1.0), (1.02, 1.04)) == 0.0

    def test_unreachable_raises(self):
        omap = ObstacleMap(
            (10.0, 10.0),
            obstacles=((4.0, 0.0, 1.0, 10.0),),  # full-height wall
        )
        planner = GridPlanner(omap, inflation_radius=0.0)
        with pytest.raises(UnreachableGoalError):
            planner.path_length((1.0, 5.0), (8.0, 5.0))

    def test_occupied_endpoint_raises(self):
        omap = ObstacleMap((10.0, 10.0), obstacles=((4.0, 4.0, 1.0, 1.0),))
        planner = GridPlanner(omap, inflation_radius=0.0)
        with pytest.raises(InvalidEndpointError):
            planner.path_length((4.5, 4.5), (1.0, 1.0))
        with pytest.raises(InvalidEndpointError):
            planner.path_length((1.0, 1.0), (10.5, 1.0))

    def test_matches_dijkstra_oracle_exactly(self):
        rng = np.random.default_rng(2024)
        compared = 0
        for _ in range(30):
            planner = random_grid_planner(rng)
            free = np.argwhere(~planner.occupied)
            if len(free) < 2:
                continue
            idx = rng.choice(len(free), size=2, replace=False)
            s = tuple(free[idx[0]] + 0.5)
            g = tuple(free[idx[1]] + 0.5)
            want = dijkstra_oracle(planner.occupied, planner.map.cell_of(s),
                                   planner.map.cell_of(g), 1.0)
            if want is None:
                with pytest.raises(UnreachableGoalError):
                    planner.path_length(s, g)
            else:
                assert planner.path_length(s, g) == want  # exact
                compared += 1
        assert compared >= 10

    def test_symmetric(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            planner = random_grid_planner(rng, n=20)
            free = np.argwhere(~planner.occupied)
            idx = rng.choice(len(free), size=2, replace=False)
            s = tuple(free[idx[0]] + 0.5)
            g = tuple(free[idx[1]] + 0.5)
            try:
                assert planner.path_length(s, g) == planner.path_length(g, s)
            except UnreachableGoalError:
                with pytest.raises(UnreachableGoalError):
                    planner.path_length(g, s)

    def test_no_corner_cutting(self):
        # hugging an obstacle corner diagonally is forbidden; the detour is 2 straights
        omap = ObstacleMap((6.0, 6.0), obstacles=((2.0, 2.0, 1.0, 1.0),), resolution=1.0)
        planner = GridPlanner(omap, inflation_radius=0.0)
        cost = planner.path_length((2.5, 3.5), (3.5, 2.5))
        assert cost > SQRT2 + 1e-9  # the single diagonal move is forbidden
        assert cost == pytest.approx(2.0)


class TestInflation:
    def test_inflated_cells_blocked(self):
        omap = ObstacleMap((10.0, 10.0), obstacles=((4.0, 4.0, 2.0, 2.0),))
        planner = GridPlanner(omap, inflation_radius=0.3)
        assert planner.is_blocked((3.85, 5.0))   # within 0.3 of the rectangle
        assert not planner.is_blocked((3.5, 5.0))
        assert planner.is_blocked((5.0, 6.25))

    def test_out_of_bounds_blocked(self):
        planner = GridPlanner(ObstacleMap((10.0, 10.0)))
        assert planner.is_blocked((-0.5, 5.0))
        assert planner.is_blocked((5.0, 11.0))

    def test_max_path_length_is_ten_diagonals(self):
        planner = GridPlanner(ObstacleMap((3.0, 4.0)))
        assert planner.max_path_length == pytest.approx(50.0)


class TestDistanceField:
    def test_matches_path_length_exactly(self):
        rng = np.random.default_rng(5)
        planner = random_grid_planner(rng, n=25, density=0.2)
        free = np.argwhere(~planner.occupied)
        goal = tuple(free[rng.integers(len(free))] + 0.5)
        field = planner.distance_field(goal)
        for _ in range(40):
            p = tuple(free[rng.integers(len(free))] + 0.5)
            v = field[planner.map.cell_of(p)]
            if math.isinf(v):
                with pytest.raises(UnreachableGoalError):
                    planner.path_length(p, goal)
            else:
                assert planner.path_length(p, goal) == v  # bit-exact

    def test_lookup_substitutes_penalty(self):
        omap = ObstacleMap((10.0, 10.0), obstacles=((4.0, 0.0, 1.0, 10.0),))
        planner = GridPlanner(omap, inflation_radius=0.0)
        field = planner.distance_field((8.0, 5.0))
        assert planner.field_lookup(field, (1.0, 5.0)) == planner.max_path_length
        assert planner.field_lookup(field, (7.0, 5.0)) < planner.max_path_length

    def test_plan_path_waypoints_free_and_reach_goal(self):
        rng = np.random.default_rng(11)
        planner = random_grid_planner(rng, n=20, density=0.2)
        free = np.argwhere(~planner.occupied)
        idx = rng.choice(len(free), size=2, replace=False)
        s = tuple(free[idx[0]] + 0.5)
        g = tuple(free[idx[1]] + 0.5)
        try:
            path = planner.plan_path(s, g)
        except UnreachableGoalError:
            return
        assert path[-1] == g
        for p in path:
            assert not planner.is_blocked(p)
