"""
Unit tests for the minimization job scheduler.
"""

import random

import pytest

from app.services.scheduler import replay_is_greedy, schedule


JOBS = [(0, 7), (1, 5), (2, 3), (3, 2)]


def test_lpt_balances_two_cores():
    """Unit test: sizes 7,5,3,2 on two cores give {7,2} and {5,3}."""
    state = schedule(JOBS, 2, "lpt")

    assert state.lists == [[0, 3], [1, 2]]
    assert state.aggregates == [9, 8]
    assert state.makespan == 9
    assert replay_is_greedy(state)


def test_round_robin_ignores_sizes():
    """Unit test: job i goes to core i mod N."""
    state = schedule(JOBS, 2, "round-robin")

    assert state.lists == [[0, 2], [1, 3]]
    assert state.aggregates == [10, 7]


def test_lpt_log_records_aggregates_before_choice():
    """Unit test: each log entry holds the loads seen when the job was placed."""
    state = schedule(JOBS, 2, "lpt")

    assert state.log[0] == (0, 0, [0, 0])
    assert state.log[2] == (2, 1, [7, 5])


def test_lpt_stays_near_lower_bound():
    """Unit test: random job sets are fully placed and LPT stays within 4/3 of the load bound."""
    rng = random.Random(3)
    for _ in range(50):
        sizes = [rng.randint(1, 40) for _ in range(rng.randint(1, 12))]
        jobs = list(enumerate(sizes))
        cores = rng.randint(1, 4)
        state = schedule(jobs, cores, "lpt")
        lower = max(max(sizes), -(-sum(sizes) // cores))
        assert replay_is_greedy(state)
        assert sorted(job for jobs_on_core in state.lists for job in jobs_on_core) == list(range(len(sizes)))
        assert sum(state.aggregates) == sum(sizes)
        assert state.makespan * 3 <= lower * 4 + max(sizes)


def test_more_cores_than_jobs():
    """Unit test: idle cores stay empty."""
    state = schedule([(0, 4)], 3)

    assert state.lists == [[0], [], []]
    assert state.makespan == 4


def test_bad_arguments():
    """Unit test: zero cores and unknown strategies are rejected."""
    with pytest.raises(ValueError):
        schedule(JOBS, 0)
    with pytest.raises(ValueError):
        schedule(JOBS, 2, "fastest")
