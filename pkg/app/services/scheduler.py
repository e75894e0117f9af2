"""
Assignment of minimization jobs to cores.
"""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from app.models.minimizer import ScheduleState, Strategy


logger = logging.getLogger(__name__)


def schedule(jobs: Sequence[Tuple[int, int]], cores: int, strategy: Strategy = "lpt") -> ScheduleState:
    """
    Distribute (job id, size) pairs over `cores` cores.

    lpt: largest jobs first, each onto the core with the smallest aggregate
    (lowest index on ties). round-robin: job at position i goes to core i mod N.
    """
    if cores < 1:
        raise ValueError("at least one core is required")
    lists: List[List[int]] = [[] for _ in range(cores)]
    aggregates = np.zeros(cores, dtype=np.int64)
    log = []
    if strategy == "lpt":
        ordered = sorted(jobs, key=lambda job: (-job[1], job[0]))
    elif strategy == "round-robin":
        ordered = list(jobs)
    else:
        raise ValueError(f"unknown strategy '{strategy}'")
    for position, (job_id, size) in enumerate(ordered):
        core = int(np.argmin(aggregates)) if strategy == "lpt" else position % cores
        log.append((job_id, core, [int(total) for total in aggregates]))
        lists[core].append(job_id)
        aggregates[core] += size
    state = ScheduleState(
        cores=cores, strategy=strategy, lists=lists, aggregates=[int(total) for total in aggregates], log=log
    )
    logger.debug("%s schedule over %d cores, makespan %d", strategy, cores, state.makespan)
    return state


def replay_is_greedy(state: ScheduleState) -> bool:
    """True when every logged choice went to a least-loaded core."""
    return all(before[core] <= min(before) for _, core, before in state.log)
