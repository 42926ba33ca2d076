"""Concurrent evaluation of ensemble members with ordered results."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

from attractor_lab.utils.logging_config import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def run_ensemble(fn: Callable[[T], R], members: Sequence[T], workers: int = 1) -> List[R]:
    """
    Apply ``fn`` to every member.

    Results come back in member order whatever the worker count, so reports
    do not depend on scheduling.

    Args:
        fn: Function of one member
        members: Ensemble
        workers: Thread count (1 runs inline)

    Returns:
        List of results, aligned with ``members``
    """
    if workers <= 1 or len(members) <= 1:
        return [fn(member) for member in members]

    logger.debug(f"running {len(members)} members on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, members))
