"""Binary tree of path segments with a sorted distance-to-goal index."""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from .curvature import CurvatureProfile, PlannerState, integrate

SIDES = ("L", "R")


class TreeError(KeyError):
    pass


class EmptyIndexError(LookupError):
    """Raised when popping from an empty heuristic index."""


class HeuristicIndex:
    """Ordered multiset of ``(key, locator)`` with FIFO tie-breaking.

    Removal is lazy: removed entries stay in the heap and are skipped on pop.
    """

    def __init__(self):
        self._heap: List[list] = []
        self._entries: Dict[str, list] = {}
        self._counter = itertools.count()

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __contains__(self, locator: str) -> bool:
        return locator in self._entries

    def push(self, key: float, locator: str) -> None:
        if locator in self._entries:
            self.remove(locator)
        entry = [key, next(self._counter), locator, True]
        self._entries[locator] = entry
        heapq.heappush(self._heap, entry)

    def remove(self, locator: str) -> bool:
        entry = self._entries.pop(locator, None)
        if entry is None:
            return False
        entry[3] = False
        return True

    def pop_min(self) -> Tuple[str, float]:
        while self._heap:
            key, _, locator, alive = heapq.heappop(self._heap)
            if alive:
                del self._entries[locator]
                return locator, key
        raise EmptyIndexError("heuristic index is empty")

    def peek(self) -> Optional[Tuple[str, float]]:
        while self._heap and not self._heap[0][3]:
            heapq.heappop(self._heap)
        if not self._heap:
            return None
        return self._heap[0][2], self._heap[0][0]

    def items(self) -> List[Tuple[float, str]]:
        return sorted((e[0], e[1], e[2]) for e in self._entries.values())


@dataclass(eq=False)
class PathNode:
    value: CurvatureProfile
    entry_state: PlannerState
    exit_state: PlannerState
    sequ: str = ""
    left: Optional["PathNode"] = None
    right: Optional["PathNode"] = None
    kind: str = "frontier"
    meta: dict = field(default_factory=dict)

    def child(self, side: str) -> Optional["PathNode"]:
        return self.left if side == "L" else self.right

    @property
    def n_children(self) -> int:
        return (self.left is not None) + (self.right is not None)

    def vacant_sides(self) -> List[str]:
        return [s for s in SIDES if self.child(s) is None]


class PathTree:
    """Tree of path segments addressed by ``L``/``R`` locator strings.

    Every inserted node is keyed in :attr:`index` by the Euclidean distance
    from its exit position to the goal. A parent whose two children both exist
    is dropped from the index.
    """

    def __init__(self, root_state: PlannerState, root_segment: Optional[CurvatureProfile] = None,
                 goal: Optional[Tuple[float, float]] = None, dt: float = 0.01):
        seg = root_segment if root_segment is not None else CurvatureProfile.empty(dt)
        exit_state = integrate(root_state, seg).final if len(seg) else root_state
        self.root = PathNode(seg, root_state, exit_state, "")
        self._nodes: Dict[str, PathNode] = {"": self.root}
        self.index = HeuristicIndex()
        self.n_pruned = 0
        self.n_popped = 0
        if goal is not None:
            self.index.push(exit_state.distance_to(goal[0], goal[1]), "")

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, locator: str) -> bool:
        return locator in self._nodes

    def __iter__(self) -> Iterator[PathNode]:
        return iter(self._nodes.values())

    def node(self, locator: str) -> PathNode:
        try:
            return self._nodes[locator]
        except KeyError:
            raise TreeError(f"no node at locator {locator!r}") from None

    def insert(self, parent_locator: str, side: str, segment: CurvatureProfile,
               goal, kind: str = "frontier", exit_state: Optional[PlannerState] = None) -> str:
        if side not in SIDES:
            raise ValueError(f"side must be 'L' or 'R', got {side!r}")
        parent = self.node(parent_locator)
        if parent.child(side) is not None:
            raise TreeError(f"side {side} of {parent_locator!r} is occupied")
        if exit_state is None:
            exit_state = integrate(parent.exit_state, segment).final if len(segment) else parent.exit_state
        locator = parent_locator + side
        node = PathNode(segment, parent.exit_state, exit_state, locator, kind=kind)
        if side == "L":
            parent.left = node
        else:
            parent.right = node
        self._nodes[locator] = node
        gx, gy = _goal_xy(goal)
        self.index.push(exit_state.distance_to(gx, gy), locator)
        if parent.n_children == 2 and self.index.remove(parent_locator):
            self.n_pruned += 1
        return locator

    def pop_min(self) -> Tuple[str, float]:
        locator, key = self.index.pop_min()
        self.n_popped += 1
        return locator, key

    def close(self, locator: str) -> bool:
        """Drop a node from the index (expansion exhausted)."""
        removed = self.index.remove(locator)
        if removed:
            self.n_pruned += 1
        return removed

    def remove_subtree(self, locator: str) -> int:
        """Detach the node at ``locator`` and all its descendants; returns how many."""
        if locator == "":
            raise TreeError("cannot remove the root")
        node = self.node(locator)
        parent = self._nodes[locator[:-1]]
        if locator[-1] == "L":
            parent.left = None
        else:
            parent.right = None
        doomed = [loc for loc in self._nodes if loc.startswith(locator)]
        for loc in doomed:
            self.index.remove(loc)
            del self._nodes[loc]
        del node
        return len(doomed)

    def path_to(self, locator: str) -> List[PathNode]:
        self.node(locator)
        return [self._nodes[locator[:i]] for i in range(len(locator) + 1)]

    def reconstruct(self, leaf_locator: str) -> CurvatureProfile:
        nodes = self.path_to(leaf_locator)
        profile = nodes[0].value
        for n in nodes[1:]:
            profile = profile + n.value
        return profile

    def to_dict(self, goal=None) -> dict:
        """JSON-ready dump: locators, exit positions, kinds and index keys."""
        keys = {loc: key for key, _, loc in self.index.items()}
        nodes = []
        for loc, n in self._nodes.items():
            nodes.append({
                "locator": loc,
                "kind": n.kind,
                "x": n.exit_state.x,
                "y": n.exit_state.y,
                "z": n.exit_state.z,
                "segment_steps": len(n.value),
                "key": keys.get(loc),
                "closed": bool(n.meta.get("closed", False)),
            })
        return {"nodes": nodes, "n_pruned": self.n_pruned, "n_popped": self.n_popped}


def _goal_xy(goal) -> Tuple[float, float]:
    if hasattr(goal, "x"):
        return goal.x, goal.y
    return float(goal[0]), float(goal[1])


def reconstruct(tree: PathTree, leaf_locator: str) -> CurvatureProfile:
    return tree.reconstruct(leaf_locator)


def insert(tree: PathTree, parent_locator: str, side: str, segment: CurvatureProfile, goal) -> str:
    return tree.insert(parent_locator, side, segment, goal)


def pop_min(index: HeuristicIndex) -> Tuple[str, float]:
    return index.pop_min()


def key_for(state: PlannerState, goal) -> float:
    gx, gy = _goal_xy(goal)
    return math.hypot(gx - state.x, gy - state.y)
