import time
import unittest

from ltlstep.utils.time_util import Deadline, get_timings, get_timings_str, start_timings, stop_timings


class TestTimeUtil(unittest.TestCase):

    def test_timings(self):
        self.assertEqual(start_timings("build", "solve"), [0, 0])
        time.sleep(0.01)
        build_time, = stop_timings("build")
        self.assertGreater(build_time, 0)
        # Stopped timings don't change
        time.sleep(0.01)
        self.assertEqual(get_timings("build"), [build_time])
        self.assertGreater(get_timings("solve")[0], build_time)

        result = get_timings_str("build")
        self.assertTrue(result.startswith("Elapsed time for build: "))
        self.assertTrue(result.endswith(" s"))

        # Restarting clears the stop time
        start_timings("build")
        self.assertLess(get_timings("build")[0], build_time)

    def test_deadline(self):
        deadline = Deadline(None)
        self.assertIsNone(deadline.limit_sec)
        self.assertFalse(deadline.is_expired())
        self.assertEqual(deadline.remaining, float("inf"))
        self.assertFalse(Deadline(-1).is_expired())
        self.assertTrue(Deadline(0).is_expired())
        self.assertEqual(Deadline(0).remaining, 0)

        deadline = Deadline(0.01)
        self.assertLessEqual(deadline.remaining, 0.01)
        time.sleep(0.02)
        self.assertTrue(deadline.is_expired())
        self.assertEqual(deadline.remaining, 0)
        self.assertGreaterEqual(deadline.elapsed, 0.02)
