"""
Models used by the logic minimizer and the job scheduler.
"""

from typing import FrozenSet, List, Literal, Optional, Tuple

from pydantic import BaseModel


Strategy = Literal["lpt", "round-robin"]


class Implicant(BaseModel):
    """Product term: one trit per variable (0, 1, or 2 for don't-care)."""
    pattern: Tuple[int, ...]
    covered_minterms: FrozenSet[int]

    @property
    def literal_count(self) -> int:
        return sum(1 for trit in self.pattern if trit != 2)

    @property
    def label(self) -> str:
        return "".join("-" if trit == 2 else str(trit) for trit in self.pattern)


class PetrickExpression(BaseModel):
    """Product of sums; every sum holds the labels covering one minterm."""
    sums: List[FrozenSet[str]]


class PetrickResult(BaseModel):
    cover: List[str]
    steps: int
    bound: int


class LogicSubmodule(BaseModel):
    """Maximal connected group of 1-bit gates."""
    id: int
    gates: List[int]
    boundary_inputs: List[int]
    boundary_outputs: List[int]
    g: int
    minimizable: bool = True
    reason: Optional[str] = None


class ScheduleState(BaseModel):
    """Assignment of submodule jobs to cores."""
    cores: int
    strategy: Strategy
    lists: List[List[int]]
    aggregates: List[int]
    # (job id, chosen core, aggregates just before the choice)
    log: List[Tuple[int, int, List[int]]] = []

    @property
    def makespan(self) -> int:
        return max(self.aggregates) if self.aggregates else 0


class SubmoduleReport(BaseModel):
    id: int
    boundary_inputs: int
    boundary_outputs: int
    original_gates: int
    minimized_gates: int
    petrick_steps: int = 0
    petrick_bound: int = 0
    replaced: bool = False
    skipped_reason: Optional[str] = None


class MinimizationReport(BaseModel):
    """Outcome of one minimize run."""
    submodules: List[SubmoduleReport]
    schedule: ScheduleState
    gates_before: int
    gates_after: int

    @property
    def total_steps(self) -> int:
        return sum(sub.petrick_steps for sub in self.submodules)
