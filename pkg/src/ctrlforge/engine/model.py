"""Compiled simulation description and state containers.

A CompiledModel is an immutable description of a kinematic tree of bodies
connected by single-dof hinge/slide joints, with geoms, actuators, sensors,
cameras and lights, plus name tables mapping indices to full identifiers.
SimState carries the minimal simulation state (qpos, qvel, time, ctrl);
DerivedData holds everything recomputable from (model, state).
"""

import dataclasses

import numpy as np

from ctrlforge import errors

JNT_HINGE = 0
JNT_SLIDE = 1

ACT_MOTOR = 0
ACT_POSITION = 1

SENSOR_JOINTPOS = 0
SENSOR_JOINTVEL = 1

# DerivedData validity stages.
STAGE_INVALID = 0
STAGE_POSITION = 1
STAGE_FULL = 2


class CompiledModel:
  """Static simulation parameters. Treat all arrays as read-only."""

  def __init__(self, **fields):
    self.__dict__.update(fields)
    self._frozen = True

  def __setattr__(self, name, value):
    if getattr(self, '_frozen', False) and name != '_frozen':
      raise AttributeError('CompiledModel is immutable')
    object.__setattr__(self, name, value)

  # -- name tables -----------------------------------------------------------

  def id2name(self, index, namespace):
    names = self._names_in(namespace)
    if not 0 <= index < len(names):
      raise errors.UnknownNameError(
          f'{namespace} index {index} out of range [0, {len(names)})')
    return names[index]

  def name2id(self, name, namespace):
    table = self._ids_in(namespace)
    try:
      return table[name]
    except KeyError:
      raise errors.UnknownNameError(
          f"no {namespace} named '{name}'") from None

  def names(self, namespace):
    return tuple(self._names_in(namespace))

  def _names_in(self, namespace):
    try:
      return self.name_tables[namespace][0]
    except KeyError:
      raise errors.UnknownNameError(
          f"unknown namespace '{namespace}'") from None

  def _ids_in(self, namespace):
    try:
      return self.name_tables[namespace][1]
    except KeyError:
      raise errors.UnknownNameError(
          f"unknown namespace '{namespace}'") from None

  def make_state(self):
    return SimState(
        qpos=np.zeros(self.nq),
        qvel=np.zeros(self.nv),
        ctrl=np.zeros(self.nu),
        time=0.0,
    )

  def element_index(self, element):
    """(namespace, index) of a model-dom element in this compiled model."""
    try:
      return self.element_map[id(element)]
    except KeyError:
      raise errors.UnknownNameError(
          f'{element!r} is not part of this compiled model') from None


@dataclasses.dataclass
class SimState:
  """Minimal simulation state."""
  qpos: np.ndarray
  qvel: np.ndarray
  ctrl: np.ndarray
  time: float

  def copy(self):
    return SimState(qpos=self.qpos.copy(), qvel=self.qvel.copy(),
                    ctrl=self.ctrl.copy(), time=self.time)


class DerivedData:
  """Quantities derived from (model, state), with staged validity.

  Position-stage fields (frames, position sensors) always reflect the
  current qpos once stage >= STAGE_POSITION. Force-stage fields (forces,
  qacc, energy) reflect the most recent completed dynamics computation.
  """

  def __init__(self, model):
    nb, ng, nv, ns = model.nbody, model.ngeom, model.nv, model.nsite
    self.stage = STAGE_INVALID
    self.xpos = np.zeros((nb, 3))
    self.xquat = np.zeros((nb, 4))
    self.xmat = np.zeros((nb, 3, 3))
    self.geom_xpos = np.zeros((ng, 3))
    self.geom_xmat = np.zeros((ng, 3, 3))
    self.site_xpos = np.zeros((ns, 3))
    self.site_xmat = np.zeros((ns, 3, 3))
    # World-frame motion subspace (Pluecker coordinates about the world
    # origin) of each dof: rows [angular(3), linear(3)].
    self.dof_subspace = np.zeros((nv, 6))
    self.body_com = np.zeros((nb, 3))
    self.body_vel = np.zeros((nb, 6))
    self.qmass = np.zeros((nv, nv))
    self.qbias = np.zeros(nv)
    self.qfrc_actuator = np.zeros(nv)
    self.qfrc_passive = np.zeros(nv)
    self.qfrc_drag = np.zeros(nv)
    self.qfrc_applied = np.zeros(nv)
    self.qacc = np.zeros(nv)
    self.actuator_force = np.zeros(model.nu)
    self.sensordata = np.zeros(model.nsensordata)
    self.energy = np.zeros(2)  # (potential, kinetic)
    # Per-geom RGBA used for rendering; a writable copy of the model's.
    self.geom_rgba = model.geom_rgba.copy()
