"""
SVG figures of footstep plans: regions filled green, right feet as red stars,
left feet as blue circles, an arrow for the orientation of every step,
step numbers and the goal pose.
"""

import logging
import math

import matplotlib
import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import FancyArrowPatch, Polygon

from ltlstep.api import Foot

logger = logging.getLogger(__name__)

# Output bytes depend only on the plan and the scenario
RC_PARAMS = {
    "svg.hashsalt": "ltlstep",
    "svg.fonttype": "none",
    "path.simplify": False,
}

STYLE = {
    "figure_size": (6.0, 6.0),
    "margin": 0.3,
    "region_face": (0.0, 1.0, 0.0, 0.15),
    "region_edge": "green",
    "region_label_size": 9,
    "markers": {
        Foot.RIGHT: {"marker": "*", "color": "red", "markersize": 11},
        Foot.LEFT: {"marker": "o", "color": "blue", "markersize": 7},
    },
    "arrow_length": 0.12,
    "arrow_color": "black",
    "number_size": 7,
    "number_offset": (0.03, 0.03),
    "goal": {"marker": "X", "color": "black", "markersize": 10},
}


def _get_limits(plan, scenario):
    points = [vertex for region in scenario.regions for vertex in region.vertices]
    points += [step.point for step in plan.steps]
    points.append(scenario.goal[:2])
    points = np.asarray(points, dtype=float)
    margin = STYLE["margin"]
    return points.min(axis=0) - margin, points.max(axis=0) + margin


def render_svg(plan, scenario, path):
    if not plan.steps:
        raise ValueError("Plan has no steps")
    with matplotlib.rc_context(RC_PARAMS):
        figure = Figure(figsize=STYLE["figure_size"])
        ax = figure.add_subplot(1, 1, 1)

        for region in scenario.regions:
            ax.add_patch(Polygon(region.vertices, closed=True, facecolor=STYLE["region_face"],
                                 edgecolor=STYLE["region_edge"], gid="region_%s" % region.name))
            center = region.vertices.mean(axis=0)
            ax.text(center[0], center[1], region.name, ha="center", va="center",
                    fontsize=STYLE["region_label_size"], color=STYLE["region_edge"])

        length = STYLE["arrow_length"]
        dx, dy = STYLE["number_offset"]
        for step in plan.steps:
            ax.plot([step.x], [step.y], linestyle="none", gid="footstep_%s" % step.index,
                    **STYLE["markers"][step.foot])
            ax.add_patch(FancyArrowPatch((step.x, step.y),
                                         (step.x + length * math.cos(step.theta),
                                          step.y + length * math.sin(step.theta)),
                                         arrowstyle="->", color=STYLE["arrow_color"], mutation_scale=8))
            ax.text(step.x + dx, step.y + dy, str(step.index), fontsize=STYLE["number_size"])

        goal_x, goal_y, goal_theta = scenario.goal
        ax.plot([goal_x], [goal_y], linestyle="none", gid="goal", **STYLE["goal"])
        ax.add_patch(FancyArrowPatch((goal_x, goal_y),
                                     (goal_x + length * math.cos(goal_theta), goal_y + length * math.sin(goal_theta)),
                                     arrowstyle="->", color=STYLE["goal"]["color"], mutation_scale=8))

        lower, upper = _get_limits(plan, scenario)
        ax.set_xlim(lower[0], upper[0])
        ax.set_ylim(lower[1], upper[1])
        ax.set_aspect("equal")
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        ax.set_title("%s (%s)" % (plan.scenario or scenario.name, plan.status))
        figure.savefig(path, format="svg", metadata={"Date": None})
    logger.info("Figure written to %s", path)
    return path
