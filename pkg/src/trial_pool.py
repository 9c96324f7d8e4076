"""Parallel trial runner with sequence-ordered results."""

import logging
import os
import threading
from concurrent.futures import Future, ThreadPoolExecutor
from typing import Any, Callable, Optional

from src.config import AppConfig, resolve
from src.utils import SigcurveError, TrialResult


logger = logging.getLogger(__name__)


def resolve_workers(workers: str | int) -> int:
    """Translate the `workers` setting into a thread count."""
    if workers == "auto":
        return max(1, (os.cpu_count() or 1) - 1)
    return int(workers)


class TrialPool:
    """Runs independent, individually seeded trials on a thread pool.

    Results are buffered by sequence number so the collected output does not
    depend on worker count or completion order.
    """

    def __init__(
        self,
        worker_fn: Callable[[Any], Any],
        config: Optional[AppConfig] = None,
        max_workers: Optional[int] = None,
    ):
        """Initialize trial pool.

        Args:
            worker_fn: Function evaluating one trial payload
            config: Supplies the `workers` setting when max_workers is None
            max_workers: Explicit thread count
        """
        self._worker_fn = worker_fn
        if max_workers is None:
            max_workers = resolve_workers(resolve(config).workers)
        self._executor = ThreadPoolExecutor(max_workers=max_workers)

        # Completed trials: {sequence: TrialResult}
        self._completed: dict[int, TrialResult] = {}
        self._active_futures: list[Future] = []
        self._lock = threading.Lock()

    def __enter__(self) -> "TrialPool":
        return self

    def __exit__(self, *exc_info) -> None:
        self._executor.shutdown(wait=True, cancel_futures=exc_info[0] is not None)

    def submit(self, sequence: int, payload: Any) -> None:
        """Queue one trial."""
        logger.debug("[TRIAL %d] Submitted", sequence)
        future = self._executor.submit(self._worker_thread, sequence, payload)
        future.add_done_callback(self._on_trial_complete)
        self._active_futures.append(future)

    def _worker_thread(self, sequence: int, payload: Any) -> TrialResult:
        try:
            return TrialResult(sequence=sequence, value=self._worker_fn(payload))
        except Exception as e:
            # Return error result instead of raising
            logger.debug("[TRIAL %d] Worker error: %s", sequence, e)
            return TrialResult(sequence=sequence, error=e)

    def _on_trial_complete(self, future: Future) -> None:
        result = future.result()
        with self._lock:
            self._completed[result.sequence] = result

    def collect(self, raise_errors: bool = True) -> list[TrialResult]:
        """Wait for all trials and return their results ordered by sequence.

        Args:
            raise_errors: Re-raise the first (lowest sequence) SigcurveError;
                other exceptions are always re-raised
        """
        self._executor.shutdown(wait=True)
        with self._lock:
            results = [self._completed[seq] for seq in sorted(self._completed)]
        for result in results:
            if result.error is None:
                continue
            if raise_errors or not isinstance(result.error, SigcurveError):
                raise result.error
        logger.debug("Collected %d trials", len(results))
        return results


def run_trials(
    worker_fn: Callable[[Any], Any],
    payloads: list[Any],
    config: Optional[AppConfig] = None,
    raise_errors: bool = True,
) -> list[TrialResult]:
    """Evaluate `worker_fn` on every payload; results in payload order."""
    pool = TrialPool(worker_fn, config)
    for sequence, payload in enumerate(payloads):
        pool.submit(sequence, payload)
    return pool.collect(raise_errors=raise_errors)
