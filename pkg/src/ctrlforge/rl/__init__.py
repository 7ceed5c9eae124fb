"""Agent-facing environment API and reward shaping."""

from ctrlforge.rl import rewards
from ctrlforge.rl import specs
from ctrlforge.rl import wrappers
from ctrlforge.rl.environment import Environment
from ctrlforge.rl.specs import ArraySpec
from ctrlforge.rl.timestep import StepType
from ctrlforge.rl.timestep import TimeStep
