"""The lightweight coordinator: a lock table over grid cells plus the
per-iteration barrier and termination pulse.

The coordinator is an in-process service object shared by all agent
workers. Its message vocabulary mirrors the agent/coordinator wire
protocol so a networked variant can be layered on later:

    INIT_POS(agent, pos)      -> constructor positions
    PULSE(WORK | STOP)        -> complete_step return value
    POSS(set of positions)    -> snapshot()
    PREF_POS_REQ(agent, pos)  -> try_lock()
    PREF_POS_RES(SUCC | FAIL) -> try_lock() return value
    LEAVE_SIG(agent)          -> leave()
    NEW_POS(agent, pos)       -> report_new_pos()

try_lock and leave are atomic (guarded by one mutex) and may be called
concurrently from any number of workers; snapshot and complete_step are
iteration-boundary operations driven by the engine.
"""

from __future__ import annotations

import enum
import threading
from typing import Mapping, Optional

from .core import GridDims, GridPos, TargetShape, chebyshev


class Pulse(enum.Enum):
    WORK = "WORK"
    STOP = "STOP"


class LockResponse(enum.Enum):
    SUCC = "SUCC"
    FAIL = "FAIL"


class ProtocolError(RuntimeError):
    """An agent or the engine violated the interaction protocol; the run is corrupt."""


class WatchdogTimeout(RuntimeError):
    """An iteration exceeded its wall-time budget."""


class AgentHandle:
    """Agent-bound view of the coordinator used by the decision loop."""

    __slots__ = ("_coord", "_agent")

    def __init__(self, coord: "Coordinator", agent: int):
        self._coord = coord
        self._agent = agent

    def try_lock(self, pos: GridPos) -> bool:
        return self._coord.try_lock(self._agent, pos) is LockResponse.SUCC

    def leave(self, old_pos: GridPos) -> None:
        self._coord.leave(self._agent, old_pos)


class Coordinator:
    def __init__(self, dims: GridDims, shape: TargetShape, init_positions: Mapping[int, GridPos]):
        self._dims = dims
        self._shape = shape
        self._mutex = threading.Lock()
        self._owner: dict[GridPos, int] = {}
        self._owned_count: dict[int, int] = {}
        self._positions: dict[int, GridPos] = {}
        self._reports: dict[int, GridPos] = {}
        self._time = 0

        seen: set[GridPos] = set()
        for agent, pos in init_positions.items():
            if not dims.contains(pos):
                raise ValueError(f"agent {agent} initial position {pos} out of bounds")
            if pos in seen:
                raise ValueError(f"duplicate initial position {pos}")
            seen.add(pos)
        # lockAll(p_0)
        for agent, pos in init_positions.items():
            self._owner[pos] = agent
            self._owned_count[agent] = 1
            self._positions[agent] = pos

    @property
    def time(self) -> int:
        return self._time

    def positions(self) -> dict[int, GridPos]:
        with self._mutex:
            return dict(self._positions)

    def handle(self, agent: int) -> AgentHandle:
        return AgentHandle(self, agent)

    def try_lock(self, agent: int, pos: GridPos) -> LockResponse:
        """Non-blocking acquisition of a cell's mutex; never waits."""
        if not self._dims.contains(pos):
            raise ValueError(f"try_lock target {pos} out of bounds")
        with self._mutex:
            if pos in self._owner:
                return LockResponse.FAIL
            self._owner[pos] = agent
            self._owned_count[agent] += 1
            return LockResponse.SUCC

    def leave(self, agent: int, old_pos: GridPos) -> None:
        """Release the agent's previous cell after it has locked its new one."""
        with self._mutex:
            if self._owner.get(old_pos) != agent:
                raise ProtocolError(
                    f"agent {agent} tried to release {old_pos} it does not own"
                )
            if self._owned_count[agent] < 2:
                raise ProtocolError(
                    f"agent {agent} sent a leave signal without holding a new cell"
                )
            del self._owner[old_pos]
            self._owned_count[agent] -= 1

    def report_new_pos(self, agent: int, pos: GridPos) -> None:
        with self._mutex:
            if agent in self._reports:
                raise ProtocolError(f"agent {agent} reported its new position twice")
            self._reports[agent] = pos

    def snapshot(self) -> frozenset[GridPos]:
        """Immutable copy of the occupied cells at the current iteration boundary."""
        with self._mutex:
            return frozenset(self._positions.values())

    def is_complete(self) -> bool:
        with self._mutex:
            return self._shape.cells <= frozenset(self._positions.values())

    def complete_step(self, new_positions: Optional[Mapping[int, GridPos]] = None) -> Pulse:
        """Barrier: ingest all NEW_POS reports, advance time, emit the pulse.

        Verifies the lock/occupancy correspondence, injectivity, and the
        single-step displacement bound before committing the new state.
        """
        with self._mutex:
            batch = dict(new_positions) if new_positions is not None else dict(self._reports)
            if set(batch) != set(self._positions):
                missing = set(self._positions) - set(batch)
                extra = set(batch) - set(self._positions)
                raise ProtocolError(
                    f"barrier violation: missing reports {sorted(missing)}, "
                    f"unknown reporters {sorted(extra)}"
                )
            if len(set(batch.values())) != len(batch):
                raise ProtocolError("barrier violation: reported positions collide")
            for agent, pos in batch.items():
                if not self._dims.contains(pos):
                    raise ProtocolError(f"agent {agent} reported out-of-bounds {pos}")
                if chebyshev(pos, self._positions[agent]) > 1:
                    raise ProtocolError(
                        f"agent {agent} moved {self._positions[agent]} -> {pos}, "
                        "more than one cell"
                    )
                if self._owner.get(pos) != agent:
                    raise ProtocolError(
                        f"agent {agent} reported {pos} but does not hold its lock"
                    )
            if set(self._owner) != set(batch.values()):
                raise ProtocolError("lock table does not match reported occupancy")
            for agent, count in self._owned_count.items():
                if count != 1:
                    raise ProtocolError(f"agent {agent} holds {count} locks at the barrier")
            self._positions = batch
            self._reports = {}
            self._time += 1
            done = self._shape.cells <= frozenset(batch.values())
            return Pulse.STOP if done else Pulse.WORK
