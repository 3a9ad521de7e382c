"""Built-in example data: a whale and a desk lamp.

The whale swim string ships with the package because zero-shot prompts
need one well-known animation from another object as a format
demonstration; it also powers the offline demos and tests.
"""

from __future__ import annotations

WHALE_SWIM_DESCRIPTION = "the whale swims forward, sweeping its tail from side to side"


def whale_object_json() -> str:
    return """\
{
  "name": "Armature",
  "rest_translation": [0, 0, 0],
  "rest_rotation": [0, 0, 0, 1],
  "children": [
    {
      "name": "Spine",
      "rest_translation": [0.5, 0, 0],
      "rest_rotation": [0, 0, 0, 1],
      "children": [
        {
          "name": "Head",
          "rest_translation": [0.8, 0, 0],
          "rest_rotation": [0, 0, 0, 1],
          "children": []
        },
        {
          "name": "TailBase",
          "rest_translation": [-0.8, 0, 0],
          "rest_rotation": [0, 0, 0, 1],
          "children": [
            {
              "name": "TailTip",
              "rest_translation": [-0.7, 0, 0],
              "rest_rotation": [0, 0, 0, 1],
              "children": []
            }
          ]
        }
      ]
    }
  ]
}
"""


def lamp_object_json() -> str:
    return """\
{
  "name": "Base",
  "rest_translation": [0, 0, 0],
  "rest_rotation": [0, 0, 0, 1],
  "children": [
    {
      "name": "LowerArm",
      "rest_translation": [0, 0.5, 0],
      "rest_rotation": [0, 0, 0, 1],
      "children": [
        {
          "name": "UpperArm",
          "rest_translation": [0, 0.4, 0],
          "rest_rotation": [0, 0, 0, 1],
          "children": [
            {
              "name": "Head",
              "rest_translation": [0, 0.3, 0],
              "rest_rotation": [0, 0, 0, 1],
              "children": []
            }
          ]
        }
      ]
    }
  ]
}
"""


def whale_swim_animstring() -> str:
    return """\
ANIMATION Swim
DURATION 2
JOINT Spine
(0, 0, 0.05, 1, 0)
(0, 0, -0.05, 1, 1)
(0, 0, 0.05, 1, 2)
JOINT TailBase
(0, 0, 0.2, 0.98, 0)
(0, 0, -0.2, 0.98, 1)
(0, 0, 0.2, 0.98, 2)
JOINT TailTip
(0, 0, -0.3, 0.95, 0)
(0, 0, 0.3, 0.95, 1)
(0, 0, -0.3, 0.95, 2)
ROOT
(0, 0, 0, 0)
(1, 0, 0, 2)
END
"""


def whale_tilt_head_animstring() -> str:
    """Head-only motion: everything else holds rest pose."""
    return """\
ANIMATION TiltHead
DURATION 1.5
JOINT Head
(0, 0, 0, 1, 0)
(0.2, 0, 0, 0.98, 0.75)
(0, 0, 0, 1, 1.5)
END
"""


def idle_walk_controller() -> str:
    return """\
state idle plays "Idle" loop
state walk plays "Walking" loop
initial idle
on key(space) from idle goto walk fade 0.25
on key(escape) from walk goto idle fade 0.25
"""


def random_walk_controller(probability: float = 0.5, interval: float = 0.5) -> str:
    """Wander-and-pause behavior driven entirely by random triggers."""
    return (
        'state walk plays "Walking" loop\n'
        'state idle plays "Idle" loop\n'
        "initial walk\n"
        f"on random({probability}, {interval}) from walk goto idle fade 0.2\n"
        f"on random({probability}, {interval}) from idle goto walk fade 0.2\n"
    )
