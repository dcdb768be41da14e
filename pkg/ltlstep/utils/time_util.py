import time

# Named phase timers: key -> [start, stop or None]
_spans = {}


def start_timings(*keys):
    now = time.perf_counter()
    for key in keys:
        _spans[key] = [now, None]
    return [0] * len(keys)


def stop_timings(*keys):
    now = time.perf_counter()
    for key in keys:
        _spans.setdefault(key, [now, None])[1] = now
    return get_timings(*keys)


def get_timings(*keys):
    now = time.perf_counter()
    result = []
    for key in keys:
        start, stop = _spans.get(key, (now, None))
        result.append((now if stop is None else stop) - start)
    return result


def get_timings_str(*keys):
    parts = ["%s: %.3f s" % (key, timing) for key, timing in zip(keys, get_timings(*keys))]
    return "Elapsed time for " + ", ".join(parts)


class Deadline:
    """Monotonic time budget. Limit None or negative means no limit, 0 is expired at once."""

    def __init__(self, limit_sec=None):
        self.limit_sec = limit_sec if limit_sec is not None and limit_sec >= 0 else None
        self.start_time = time.monotonic()

    @property
    def elapsed(self):
        return time.monotonic() - self.start_time

    @property
    def remaining(self):
        if self.limit_sec is None:
            return float("inf")
        return max(0.0, self.limit_sec - self.elapsed)

    def is_expired(self):
        return self.limit_sec is not None and self.elapsed >= self.limit_sec
