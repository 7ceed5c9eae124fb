"""Simulation facade: stepping contract, named indexing, element binding.

The facade enforces the documented computation ordering: after `step()`,
`forward()` or leaving a `reset_context()`, position-stage quantities
(frames, joint sensors) always correspond to the current state, while
force- and acceleration-derived quantities (qacc, actuator forces) refer
to the most recently completed transition.
"""

import contextlib

import numpy as np

from ctrlforge import errors
from ctrlforge.engine import compiler
from ctrlforge.engine import dynamics
from ctrlforge.engine import fastpath
from ctrlforge.engine import integrators
from ctrlforge.engine import model as model_lib
from ctrlforge.mjcf import element as element_lib
from ctrlforge.mjcf import parser


class Physics:
  """A compiled model plus its simulation state and derived data."""

  def __init__(self, model):
    self._model = model
    self._state = model.make_state()
    self._derived = model_lib.DerivedData(model)
    self._workspace = fastpath.Workspace(model) if fastpath.AVAILABLE \
        else None
    self._scratch = model_lib.DerivedData(model)
    self._data = Data(self)
    self._named = NamedAccessor(self)
    self._bindings = {}
    # Queued external point forces: [body, force(3), point(3), steps left].
    self._perturbations = []
    self.forward()

  # -- constructors ----------------------------------------------------------

  @classmethod
  def from_model(cls, root):
    """Builds a Physics from a model root (spanning attached models)."""
    return cls(compiler.compile_model(root))

  @classmethod
  def from_xml_string(cls, xml_text):
    return cls.from_model(parser.parse_string(xml_text))

  @classmethod
  def from_xml_path(cls, path):
    return cls.from_model(parser.parse_file(path))

  # -- accessors ---------------------------------------------------------------

  @property
  def model(self):
    return self._model

  @property
  def data(self):
    return self._data

  @property
  def named(self):
    return self._named

  def time(self):
    return self._state.time

  def timestep(self):
    return self._model.timestep

  # -- state control -------------------------------------------------------------

  def reset(self):
    """Resets to the default state and recomputes all derived quantities."""
    self._reset_state()
    self.forward()

  def _reset_state(self):
    self._state.qpos[:] = 0.0
    self._state.qvel[:] = 0.0
    self._state.ctrl[:] = 0.0
    self._state.time = 0.0
    self._perturbations.clear()
    self._derived.stage = model_lib.STAGE_INVALID

  @contextlib.contextmanager
  def reset_context(self):
    """Resets, lets the caller set the state, then runs a full forward pass.

    The forward pass on exit goes through accelerations so force- and
    acceleration-derived quantities are meaningful at the initial state. It
    runs even when the body raises, leaving the physics consistent.
    """
    self._reset_state()
    try:
      yield self
    finally:
      self.forward()

  def forward(self):
    """Full recomputation (kinematics through accelerations) at the
    current state and control."""
    dynamics.position_stage(self._model, self._state.qpos, self._derived)
    dynamics.write_sensors(self._model, self._state.qpos, self._state.qvel,
                           self._derived)
    dynamics.dynamics_stage(self._model, self._derived, self._state.qpos,
                            self._state.qvel, self._state.ctrl,
                            applied=self._applied_forces())
    return self

  def step(self, n_sub=1):
    """Advances the simulation by `n_sub` physics timesteps.

    Completes the control-dependent half of each transition, then
    recomputes position-stage quantities for the new state, so rendered
    pixels and position sensors correspond to the current state while
    acceleration-derived values refer to the last transition.
    """
    if n_sub < 1:
      raise errors.Error('step() needs n_sub >= 1')
    model, state, derived = self._model, self._state, self._derived
    if self._workspace is not None and not self._perturbations:
      ws = self._workspace
      status = fastpath.run_substeps(model, state, n_sub, ws)
      state.time += n_sub * model.timestep
      if status == 1:
        raise errors.Error('internal error: mass matrix is not positive '
                           'definite')
      if status == 2:
        raise errors.DivergenceError(
            f'simulation diverged at time {state.time:.6g}s: '
            'non-finite state')
      derived.qacc[:] = ws.qacc_transition
      derived.actuator_force[:] = ws.act_force_transition
      # The kernel leaves current kinematics in the workspace arrays.
      np.copyto(derived.xpos, ws.xpos)
      np.copyto(derived.xquat, ws.xquat)
      np.copyto(derived.xmat, ws.xmat)
      np.copyto(derived.body_com, ws.body_com_w)
      np.copyto(derived.geom_xpos, ws.geom_xpos)
      np.copyto(derived.geom_xmat, ws.geom_xmat)
      np.copyto(derived.site_xpos, ws.site_xpos)
      np.copyto(derived.site_xmat, ws.site_xmat)
      np.copyto(derived.dof_subspace, ws.dof_s)
      derived.stage = model_lib.STAGE_POSITION
    else:
      for _ in range(n_sub):
        if derived.stage < model_lib.STAGE_POSITION:
          dynamics.position_stage(model, state.qpos, derived)
        integrators.step(model, derived, state, self._scratch,
                         applied=self._applied_forces())
        self._tick_perturbations()
        derived.stage = model_lib.STAGE_INVALID
      dynamics.position_stage(model, state.qpos, derived)
    dynamics.write_sensors(model, state.qpos, state.qvel, derived)
    return self

  def set_control(self, ctrl):
    ctrl = np.asarray(ctrl, dtype=float)
    if ctrl.shape != (self._model.nu,):
      raise errors.Error(
          f'control must have shape ({self._model.nu},), got {ctrl.shape}')
    self._state.ctrl[:] = ctrl

  def energy(self):
    """(potential, kinetic) energy at the current state."""
    dynamics.position_stage(self._model, self._state.qpos, self._scratch)
    dynamics.mass_matrix(self._model, self._scratch, out=self._scratch.qmass)
    return dynamics.energy(self._model, self._scratch, self._state.qpos,
                           self._state.qvel)

  def body_spatial_velocities(self):
    """World-frame spatial velocity of each body (Pluecker about the
    origin, rows [angular, linear]) at the current state."""
    if self._derived.stage < model_lib.STAGE_POSITION:
      dynamics.position_stage(self._model, self._state.qpos, self._derived)
    return dynamics.body_velocities(self._model, self._derived,
                                    self._state.qvel)

  # -- external perturbations ------------------------------------------------------

  def apply_force(self, body, force, point=None, duration=1):
    """Queues a world-frame force on a body for `duration` substeps.

    `body` is an index or name; the force is applied at world `point`
    (default: the body's current frame origin).
    """
    if isinstance(body, str):
      body = self._model.name2id(body, 'body')
    if not 0 < body < self._model.nbody:
      raise errors.Error(f'body index {body} out of range')
    force = np.asarray(force, dtype=float)
    if point is None:
      point = self._derived.xpos[body].copy()
    point = np.asarray(point, dtype=float)
    if not (np.isfinite(force).all() and np.isfinite(point).all()):
      raise errors.Error('perturbation force/point must be finite')
    self._perturbations.append([int(body), force, point, int(duration)])

  def _applied_forces(self):
    if not self._perturbations:
      return None
    tau = np.zeros(self._model.nv)
    if self._derived.stage < model_lib.STAGE_POSITION:
      dynamics.position_stage(self._model, self._state.qpos, self._derived)
    for body, force, point, _ in self._perturbations:
      dynamics.apply_point_force(self._model, self._derived, body, force,
                                 point, tau)
    return tau

  def _tick_perturbations(self):
    for entry in self._perturbations:
      entry[3] -= 1
    self._perturbations = [e for e in self._perturbations if e[3] > 0]

  # -- element binding ---------------------------------------------------------------

  def bind(self, elements):
    """Read/write access to model and state fields of model-dom elements.

    Accepts a single element or a sequence from one namespace. Attribute
    reads/writes are exactly equivalent to indexed access at the elements'
    compiled indices. Bindings are stateless index views, cached per
    element set.
    """
    if isinstance(elements, element_lib.Element):
      key = id(elements)
    else:
      elements = list(elements)
      key = tuple(id(el) for el in elements)
    cached = self._bindings.get(key)
    if cached is None:
      cached = Binding(self, elements)
      self._bindings[key] = cached
    return cached

  # -- rendering ----------------------------------------------------------------------

  def render(self, height=240, width=320, camera_id=None, mode='rgb'):
    """Renders the current configuration with the software rasterizer.

    Args:
      height, width: output resolution in pixels.
      camera_id: model camera index or name; None for the default
        auto-framed orbit camera.
      mode: 'rgb' (H, W, 3) uint8; 'depth' (H, W) float32 distances in
        metres with 0 for background; 'segmentation' (H, W) int32 geom
        indices with -1 for background.
    """
    from ctrlforge.rendering import rasterizer
    if self._derived.stage < model_lib.STAGE_POSITION:
      dynamics.position_stage(self._model, self._state.qpos, self._derived)
    return rasterizer.render(self._model, self._derived, height=height,
                             width=width, camera_id=camera_id, mode=mode)


class Data:
  """View of the simulation state and derived quantities.

  Array attributes are writable in place (`data.qpos[:] = ...`) but cannot
  be rebound (`data.qpos = ...` raises AttributeError).
  """

  def __init__(self, physics):
    object.__setattr__(self, '_physics', physics)

  @property
  def qpos(self):
    return self._physics._state.qpos

  @property
  def qvel(self):
    return self._physics._state.qvel

  @property
  def ctrl(self):
    return self._physics._state.ctrl

  @property
  def time(self):
    return self._physics._state.time

  @property
  def xpos(self):
    return self._physics._derived.xpos

  @property
  def xquat(self):
    return self._physics._derived.xquat

  @property
  def xmat(self):
    return self._physics._derived.xmat

  @property
  def geom_xpos(self):
    return self._physics._derived.geom_xpos

  @property
  def geom_xmat(self):
    return self._physics._derived.geom_xmat

  @property
  def site_xpos(self):
    return self._physics._derived.site_xpos

  @property
  def site_xmat(self):
    return self._physics._derived.site_xmat

  @property
  def qacc(self):
    return self._physics._derived.qacc

  @property
  def qmass(self):
    return self._physics._derived.qmass

  @property
  def actuator_force(self):
    return self._physics._derived.actuator_force

  @property
  def sensordata(self):
    return self._physics._derived.sensordata

  @property
  def geom_rgba(self):
    """Live render colors, initialized from the model (writable)."""
    return self._physics._derived.geom_rgba

  @property
  def energy(self):
    return self._physics._derived.energy

  def __setattr__(self, name, value):
    raise AttributeError(
        f"can't set attribute '{name}'; assign into the array instead "
        f'(data.{name}[:] = ...)')


# Named-view row/column tables per data field.
_XYZ = ('x', 'y', 'z')
_WXYZ = ('w', 'x', 'y', 'z')

_NAMED_FIELDS = {
    'qpos': ('joint', None),
    'qvel': ('joint', None),
    'ctrl': ('actuator', None),
    'actuator_force': ('actuator', None),
    'sensordata': ('sensor', None),
    'xpos': ('body', _XYZ),
    'xquat': ('body', _WXYZ),
    'geom_xpos': ('geom', _XYZ),
    'site_xpos': ('site', _XYZ),
}


class NamedAccessor:

  def __init__(self, physics):
    self._data = NamedData(physics)

  @property
  def data(self):
    return self._data


class NamedData:

  def __init__(self, physics):
    self._physics = physics

  def __getattr__(self, field):
    if field.startswith('_') or field not in _NAMED_FIELDS:
      raise AttributeError(f"no named view for '{field}'")
    namespace, columns = _NAMED_FIELDS[field]
    array = getattr(self._physics.data, field)
    return NamedView(array, self._physics.model.names(namespace), columns,
                     field)


class NamedView:
  """Name-addressable view of a row-indexed array.

  Rows resolve by element name, columns (where present) by axis label.
  All other index forms pass through to the underlying array, and writes
  mutate it in place.
  """

  def __init__(self, array, row_names, col_names, label):
    self._array = array
    self._rows = {name: i for i, name in enumerate(row_names)}
    self._row_names = row_names
    self._cols = ({name: i for i, name in enumerate(col_names)}
                  if col_names else None)
    self._label = label

  def _resolve_row(self, key):
    if isinstance(key, str):
      try:
        return self._rows[key]
      except KeyError:
        raise errors.UnknownNameError(
            f"{self._label}: unknown name '{key}'") from None
    if isinstance(key, (list, tuple)):
      return [self._resolve_row(k) for k in key]
    return key

  def _resolve_col(self, key):
    if self._cols is None:
      return key
    if isinstance(key, str):
      try:
        return self._cols[key]
      except KeyError:
        raise errors.UnknownNameError(
            f"{self._label}: unknown column '{key}'") from None
    if isinstance(key, (list, tuple)):
      return [self._resolve_col(k) for k in key]
    return key

  def _resolve(self, key):
    if isinstance(key, tuple) and len(key) == 2:
      return (self._resolve_row(key[0]), self._resolve_col(key[1]))
    return self._resolve_row(key)

  def __getitem__(self, key):
    return self._array[self._resolve(key)]

  def __setitem__(self, key, value):
    self._array[self._resolve(key)] = value

  @property
  def axes(self):
    return (tuple(self._row_names),
            tuple(self._cols) if self._cols else None)

  def __repr__(self):
    lines = [f'NamedView({self._label}):']
    for name in self._row_names:
      lines.append(f'  {name:24s} {self._array[self._rows[name]]}')
    return '\n'.join(lines)


# Binding field tables: namespace -> field -> (container, array attribute).
_BINDING_FIELDS = {
    'joint': {
        'qpos': ('state', 'qpos'),
        'qvel': ('state', 'qvel'),
        'damping': ('model', 'jnt_damping'),
        'stiffness': ('model', 'jnt_stiffness'),
        'springref': ('model', 'jnt_springref'),
        'range': ('model', 'jnt_range'),
        'axis': ('model', 'jnt_axis'),
    },
    'actuator': {
        'ctrl': ('state', 'ctrl'),
        'force': ('derived', 'actuator_force'),
        'ctrlrange': ('model', 'act_ctrlrange'),
        'gear': ('model', 'act_gear'),
        'kp': ('model', 'act_kp'),
        'kv': ('model', 'act_kv'),
    },
    'geom': {
        'xpos': ('derived', 'geom_xpos'),
        'xmat': ('derived', 'geom_xmat'),
        'rgba': ('derived', 'geom_rgba'),
        'pos': ('model', 'geom_pos'),
        'size': ('model', 'geom_size'),
        'fluidcoef': ('model', 'geom_fluidcoef'),
    },
    'body': {
        'xpos': ('derived', 'xpos'),
        'xquat': ('derived', 'xquat'),
        'xmat': ('derived', 'xmat'),
        'com': ('derived', 'body_com'),
        'pos': ('model', 'body_pos'),
        'quat': ('model', 'body_quat'),
        'mass': ('model', 'body_mass'),
    },
    'site': {
        'xpos': ('derived', 'site_xpos'),
        'xmat': ('derived', 'site_xmat'),
        'pos': ('model', 'site_pos'),
        'size': ('model', 'site_size'),
        'rgba': ('model', 'site_rgba'),
    },
    'sensor': {
        'sensordata': ('derived', 'sensordata'),
    },
    'camera': {
        'pos': ('model', 'cam_pos'),
        'quat': ('model', 'cam_quat'),
        'fovy': ('model', 'cam_fovy'),
    },
    'light': {
        'pos': ('model', 'light_pos'),
        'dir': ('model', 'light_dir'),
    },
}

# Fields where a single bound element still yields a 1-d array (a slice of
# the underlying data rather than a scalar).
_NO_SQUEEZE = {('sensor', 'sensordata')}


class Binding:

  def __init__(self, physics, elements):
    single = isinstance(elements, element_lib.Element)
    if single:
      elements = [elements]
    elements = list(elements)
    namespaces = set()
    indices = []
    for el in elements:
      if not isinstance(el, element_lib.Element):
        raise errors.Error(f'bind() expects model elements, got {el!r}')
      namespace, index = physics.model.element_index(el)
      namespaces.add(namespace)
      indices.append(index)
    if len(namespaces) > 1:
      raise errors.Error(
          f'bind() needs elements of one namespace, got {sorted(namespaces)}')
    object.__setattr__(self, '_physics', physics)
    object.__setattr__(self, '_namespace',
                       namespaces.pop() if namespaces else None)
    object.__setattr__(self, '_indices',
                       indices[0] if single else np.asarray(indices,
                                                            dtype=int))
    object.__setattr__(self, '_single', single)

  def _array(self, field):
    if self._namespace is None:
      raise errors.Error('empty binding has no fields')
    fields = _BINDING_FIELDS.get(self._namespace, {})
    if field not in fields:
      raise AttributeError(
          f"{self._namespace} binding has no field '{field}'")
    container, attr = fields[field]
    physics = self._physics
    owner = {'state': physics._state, 'derived': physics._derived,
             'model': physics.model}[container]
    return getattr(owner, attr)

  def __getattr__(self, field):
    if field.startswith('_'):
      raise AttributeError(field)
    if self._namespace is None:
      return np.zeros(0)
    array = self._array(field)
    if self._single and (self._namespace, field) in _NO_SQUEEZE:
      return array[self._indices:self._indices + 1]
    return array[self._indices]

  def __setattr__(self, field, value):
    array = self._array(field)
    if self._single and (self._namespace, field) in _NO_SQUEEZE:
      array[self._indices:self._indices + 1] = value
    else:
      array[self._indices] = value

  def __len__(self):
    return 1 if self._single else len(self._indices)
