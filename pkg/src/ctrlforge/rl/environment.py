"""The environment contract agents program against.

Episodes follow FIRST MID* LAST. Stepping a finished (or never-started)
environment starts a fresh episode automatically, so harness loops never
need an explicit reset call.
"""

import abc


class Environment(abc.ABC):
  """Abstract agent-facing environment."""

  @abc.abstractmethod
  def reset(self):
    """Starts a new episode: returns a FIRST TimeStep."""

  @abc.abstractmethod
  def step(self, action):
    """Advances one control step: returns a MID or LAST TimeStep.

    After a LAST step (or before any reset) the next call starts a new
    episode, ignoring the action.
    """

  @abc.abstractmethod
  def action_spec(self):
    """ArraySpec describing valid actions."""

  @abc.abstractmethod
  def observation_spec(self):
    """Ordered mapping of observation name to ArraySpec."""

  def reward_spec(self):
    from ctrlforge.rl import specs
    return specs.ArraySpec(shape=(), name='reward')

  def discount_spec(self):
    from ctrlforge.rl import specs
    return specs.ArraySpec(shape=(), minimum=0.0, maximum=1.0,
                           name='discount')

  def close(self):
    pass

  def __enter__(self):
    return self

  def __exit__(self, *args):
    self.close()
