"""The agent-facing step record and episode structure."""

import enum
from typing import Any, NamedTuple, Optional


class StepType(enum.IntEnum):
  FIRST = 0
  MID = 1
  LAST = 2

  def first(self):
    return self is StepType.FIRST

  def mid(self):
    return self is StepType.MID

  def last(self):
    return self is StepType.LAST


class TimeStep(NamedTuple):
  """One environment transition.

  On the FIRST step of an episode `reward` and `discount` are None: no
  transition produced them, and None is unambiguous where a genuine zero
  reward is not.
  """
  step_type: StepType
  reward: Optional[float]
  discount: Optional[float]
  observation: Any

  def first(self):
    return self.step_type is StepType.FIRST

  def mid(self):
    return self.step_type is StepType.MID

  def last(self):
    return self.step_type is StepType.LAST


def restart(observation):
  return TimeStep(StepType.FIRST, None, None, observation)


def transition(reward, observation, discount=1.0):
  return TimeStep(StepType.MID, reward, discount, observation)


def termination(reward, observation):
  return TimeStep(StepType.LAST, reward, 0.0, observation)


def truncation(reward, observation, discount=1.0):
  return TimeStep(StepType.LAST, reward, discount, observation)
