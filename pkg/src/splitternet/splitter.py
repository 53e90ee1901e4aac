"""Register-level splitter objects.

A splitter is a one-shot shared-memory object built from two multi-writer
registers.  Each visiting process runs a short wait-free program and leaves
with one of three outcomes: ``STOP``, ``RIGHT``, or ``DOWN``.  Whatever the
interleaving:

* at most one process ever obtains ``STOP``,
* a process running the splitter alone obtains ``STOP``,
* if two or more processes visit, not all of them obtain ``RIGHT`` and not
  all of them obtain ``DOWN``.

The program is the classic one (Moir/Anderson, 1995)::

    X := pid
    if Y: return RIGHT       # 2 accesses on this path
    Y := true
    if X == pid: return STOP # 4 accesses on this path
    else:        return DOWN

Each line is a single atomic register access.  A scheduler drives the
interleaving by choosing whose next access runs; :func:`step` performs
exactly one access and reports it as a :class:`RegisterEvent`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple


class Outcome(Enum):
    """Final result of one splitter visit."""

    STOP = "stop"
    RIGHT = "right"
    DOWN = "down"


class Phase(Enum):
    """The next register access a visiting process will perform."""

    WRITE_X = "write_x"
    READ_Y = "read_y"
    WRITE_Y = "write_y"
    READ_X = "read_x"
    DONE = "done"


class RegisterEvent(NamedTuple):
    """One atomic register access, as observed by a trace recorder."""

    pid: int
    node: int
    phase: str  # "write_x" | "read_y" | "write_y" | "read_x"
    register: str  # "X" | "Y"
    op: str  # "read" | "write"
    value: int | bool | None


@dataclass
class SplitterState:
    """Shared state of one splitter: register X (a pid or empty) and flag Y."""

    reg_x: int | None = None
    reg_y: bool = False


@dataclass(frozen=True)
class StepCursor:
    """Per-process position inside the splitter program.

    A fresh visit starts at ``WRITE_X``.  Once ``phase`` is ``DONE`` the
    outcome is fixed and further stepping is an error.
    """

    phase: Phase = Phase.WRITE_X
    outcome: Outcome | None = None

    @property
    def done(self) -> bool:
        return self.phase is Phase.DONE


class SplitterError(Exception):
    """A caller violated the splitter step contract."""


def step(
    state: SplitterState, cursor: StepCursor, pid: int, node: int = 0
) -> tuple[StepCursor, RegisterEvent]:
    """Perform the single atomic access ``cursor`` points at.

    Mutates ``state`` in place and returns the advanced cursor together
    with the event describing the access.  ``node`` only labels the event.
    """
    phase = cursor.phase
    if phase is Phase.WRITE_X:
        state.reg_x = pid
        return (
            StepCursor(Phase.READ_Y),
            RegisterEvent(pid, node, "write_x", "X", "write", pid),
        )
    if phase is Phase.READ_Y:
        y = state.reg_y
        nxt = StepCursor(Phase.DONE, Outcome.RIGHT) if y else StepCursor(Phase.WRITE_Y)
        return nxt, RegisterEvent(pid, node, "read_y", "Y", "read", y)
    if phase is Phase.WRITE_Y:
        state.reg_y = True
        return (
            StepCursor(Phase.READ_X),
            RegisterEvent(pid, node, "write_y", "Y", "write", True),
        )
    if phase is Phase.READ_X:
        x = state.reg_x
        out = Outcome.STOP if x == pid else Outcome.DOWN
        return StepCursor(Phase.DONE, out), RegisterEvent(pid, node, "read_x", "X", "read", x)
    raise SplitterError(
        f"process {pid} stepped a finished splitter visit (outcome {cursor.outcome})"
    )


def run_solo(pid: int, state: SplitterState | None = None) -> Outcome:
    """Run one process through a splitter without interference.

    Returns the outcome, which on a fresh splitter is always ``STOP``.
    """
    if state is None:
        state = SplitterState()
    cursor = StepCursor()
    while not cursor.done:
        cursor, _ = step(state, cursor, pid)
    assert cursor.outcome is not None
    return cursor.outcome
