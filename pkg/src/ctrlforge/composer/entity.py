"""Reusable scene building blocks with lifecycle callbacks."""

import abc

import numpy as np

from ctrlforge import errors
from ctrlforge.composer.observation import Observable
from ctrlforge.engine import rotations


class observable:  # noqa: N801 - decorator, used as @composer.observable
  """Marks an Observables method as defining one observable.

  The method runs once per Observables instance; its result (an
  Observable) is cached and exposed as an attribute.
  """

  def __init__(self, func):
    self._func = func
    self.__doc__ = func.__doc__

  def __set_name__(self, owner, name):
    self._name = name

  def __get__(self, instance, owner):
    if instance is None:
      return self
    cache = instance._cache
    if self._name not in cache:
      obs = self._func(instance)
      if not isinstance(obs, Observable):
        raise errors.Error(
            f'{self._name} must return an Observable, got {type(obs)}')
      cache[self._name] = obs
    return cache[self._name]


class Observables:
  """Bundle of observables belonging to one entity.

  Subclasses declare observables with the @observable decorator; they are
  built lazily, after the entity's model exists.
  """

  def __init__(self, entity):
    self._entity = entity
    self._cache = {}

  @property
  def entity(self):
    return self._entity

  def as_dict(self):
    names = []
    for klass in type(self).__mro__:
      for name, attr in vars(klass).items():
        if isinstance(attr, observable) and name not in names:
          names.append(name)
    return {name: getattr(self, name) for name in names}

  def enable_all(self):
    for obs in self.as_dict().values():
      obs.enabled = True


class Entity(abc.ABC):
  """A self-contained model fragment plus observables and callbacks.

  Subclasses override `_build` (and optionally `_build_observables`)
  rather than __init__; the base constructor calls them in that order so
  the model exists before its observables are created.
  """

  def __init__(self, *args, **kwargs):
    self._parent = None
    self._children = []
    self._build(*args, **kwargs)
    self._observables = self._build_observables()

  @abc.abstractmethod
  def _build(self, *args, **kwargs):
    raise NotImplementedError

  def _build_observables(self):
    return Observables(self)

  @property
  @abc.abstractmethod
  def mjcf_model(self):
    raise NotImplementedError

  @property
  def observables(self):
    return self._observables

  # -- tree ----------------------------------------------------------------

  @property
  def parent(self):
    return self._parent

  def attach(self, child, site=None):
    """Attaches a child entity's model under this entity (or `site`).

    Returns the attachment frame element; callbacks of the child run after
    this entity's, in attachment order.
    """
    host = site if site is not None else self.mjcf_model.worldbody
    frame = host.attach(child.mjcf_model)
    child._parent = self
    self._children.append(child)
    return frame

  def iter_entities(self):
    yield self
    for child in self._children:
      yield from child.iter_entities()

  @property
  def attachment_frame(self):
    return self.mjcf_model.attachment_frame

  def observable_prefix(self):
    """Key prefix for this entity's observables ('' for the root)."""
    frame = self.attachment_frame
    if frame is None:
      return ''
    return frame.get_attribute('name')    # '<prefix>/'

  # -- pose ----------------------------------------------------------------

  def set_pose(self, physics, position=None, quaternion=None):
    """Moves the entity's attachment frame (compiled model write)."""
    frame = self.attachment_frame
    if frame is None:
      raise errors.Error('entity has no attachment frame; attach it first')
    binding = physics.bind(frame)
    if position is not None:
      binding.pos = np.asarray(position, dtype=float)
    if quaternion is not None:
      binding.quat = np.asarray(quaternion, dtype=float)

  def get_pose(self, physics):
    frame = self.attachment_frame
    if frame is None:
      raise errors.Error('entity has no attachment frame; attach it first')
    binding = physics.bind(frame)
    return np.copy(binding.xpos), np.copy(binding.xquat)

  def global_vector_to_local_frame(self, physics, vector):
    """Expresses a world-frame vector in the entity's root frame."""
    frame = self.attachment_frame
    if frame is None:
      return np.asarray(vector, dtype=float)
    rot = rotations.quat_to_mat(physics.bind(frame).xquat)
    return rot.T @ np.asarray(vector, dtype=float)

  # -- lifecycle callbacks (defaults do nothing) ------------------------------

  def initialize_episode_mjcf(self, random_state):
    pass

  def initialize_episode(self, physics, random_state):
    pass

  def before_step(self, physics, random_state):
    pass

  def before_substep(self, physics, random_state):
    pass

  def after_substep(self, physics, random_state):
    pass

  def after_step(self, physics, random_state):
    pass


class ModelWrapperEntity(Entity):
  """Entity wrapping an existing model root."""

  def _build(self, model):
    self._model = model

  @property
  def mjcf_model(self):
    return self._model
