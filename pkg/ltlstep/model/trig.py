"""
Piecewise linear sine and cosine over [-pi, pi] with 5 segments each.

Segment l covers [phi_l, phi_(l+1)) (the last one includes pi) and the
function there is g_l * theta + h_l.
"""

import math

import numpy as np

PI = math.pi


class PiecewiseLinear:

    def __init__(self, name, breakpoints, slopes, intercepts, reference=None):
        self.name = name
        self.breakpoints = np.array(breakpoints, dtype=float)
        self.slopes = np.array(slopes, dtype=float)
        self.intercepts = np.array(intercepts, dtype=float)
        self.reference = reference
        if len(self.breakpoints) != len(self.slopes) + 1 or len(self.slopes) != len(self.intercepts):
            raise ValueError("%s: %s breakpoints for %s segments" % (name, len(self.breakpoints), len(self.slopes)))
        if np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("%s: breakpoints must be strictly increasing" % name)

    def __repr__(self):
        return "<PiecewiseLinear %s segments: %s>" % (self.name, self.segment_count)

    @property
    def segment_count(self):
        return len(self.slopes)

    def segment_of(self, theta):
        index = int(np.searchsorted(self.breakpoints, theta, side="right")) - 1
        return min(max(index, 0), self.segment_count - 1)

    def interval(self, segment):
        return float(self.breakpoints[segment]), float(self.breakpoints[segment + 1])

    def value_at(self, segment, theta):
        return float(self.slopes[segment] * theta + self.intercepts[segment])

    def evaluate(self, theta):
        return self.value_at(self.segment_of(theta), theta)

    def evaluate_all(self, thetas):
        thetas = np.asarray(thetas, dtype=float)
        segments = np.clip(np.searchsorted(self.breakpoints, thetas, side="right") - 1, 0, self.segment_count - 1)
        return self.slopes[segments] * thetas + self.intercepts[segments]

    def continuity_gaps(self):
        # Difference of the adjoining segments at every interior breakpoint
        return [abs(self.value_at(l, phi) - self.value_at(l + 1, phi))
                for l, phi in enumerate(self.breakpoints[1:-1])]

    def max_error(self, count=100001):
        if self.reference is None:
            raise ValueError("%s has no reference function" % self.name)
        thetas = np.union1d(np.linspace(-PI, PI, count), self.breakpoints)
        return float(np.max(np.abs(self.evaluate_all(thetas) - self.reference(thetas))))


class TrigApprox:
    """Sine and cosine tables used by the footstep model."""

    sin = PiecewiseLinear(
        "sin",
        [-PI, 1 - PI, -1.0, 1.0, PI - 1, PI],
        [-1.0, 0.0, 1.0, 0.0, -1.0],
        [-PI, -1.0, 0.0, 1.0, PI],
        np.sin)
    cos = PiecewiseLinear(
        "cos",
        [-PI, -PI / 2 - 1, 1 - PI / 2, PI / 2 - 1, PI / 2 + 1, PI],
        [0.0, 1.0, 0.0, -1.0, 0.0],
        [-1.0, PI / 2, 1.0, PI / 2, -1.0],
        np.cos)

    @property
    def segment_count(self):
        return self.sin.segment_count

    def evaluate(self, theta):
        # (s, c)
        return self.sin.evaluate(theta), self.cos.evaluate(theta)

    def norm_band(self, count=100001):
        """Range of s^2 + c^2 over [-pi, pi]."""
        thetas = np.union1d(np.linspace(-PI, PI, count),
                            np.union1d(self.sin.breakpoints, self.cos.breakpoints))
        norms = self.sin.evaluate_all(thetas) ** 2 + self.cos.evaluate_all(thetas) ** 2
        return float(np.min(norms)), float(np.max(norms))


TRIG = TrigApprox()
