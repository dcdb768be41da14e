from threading import Condition, Lock


class Incumbent:
    """Best known integer solution shared between search workers.

    Updates are monotone: an offer is accepted only if it strictly improves the objective.
    """

    def __init__(self):
        self._cond = Condition(Lock())
        self._objective = float("inf")
        self._values = None
        self._update_count = 0

    @property
    def objective(self):
        with self._cond:
            return self._objective

    @property
    def update_count(self):
        with self._cond:
            return self._update_count

    def offer(self, objective, values):
        with self._cond:
            if objective >= self._objective:
                return False
            self._objective = objective
            self._values = values
            self._update_count += 1
            self._cond.notify_all()
            return True

    def get(self):
        with self._cond:
            return self._objective, self._values

