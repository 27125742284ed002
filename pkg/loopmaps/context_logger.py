import sys
from contextlib import contextmanager
from contextvars import ContextVar
from queue import SimpleQueue

_log_queue: ContextVar[SimpleQueue[str] | None] = ContextVar('log_queue', default=None)


@contextmanager
def context_logger():
    queue: SimpleQueue[str] = SimpleQueue()
    token = _log_queue.set(queue)
    try:
        yield queue
    finally:
        _log_queue.reset(token)


def drain(queue: SimpleQueue[str]) -> list[str]:
    result = []
    while not queue.empty():
        result.append(queue.get_nowait())
    return result


def context_print(msg: str) -> None:
    queue = _log_queue.get()
    if queue is not None:
        queue.put_nowait(msg)
    else:
        print(msg, file=sys.stderr)  # noqa: T201
