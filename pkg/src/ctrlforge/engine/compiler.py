"""Compilation of a model tree into an immutable simulation description."""

import math

import numpy as np

from ctrlforge import errors
from ctrlforge.engine import inertia as inertia_lib
from ctrlforge.engine import model as model_lib
from ctrlforge.engine import rotations
from ctrlforge.mjcf import element as element_lib
from ctrlforge.mjcf import serializer


def compile_model(root) -> model_lib.CompiledModel:
  """Compiles a model root (including attached models) for simulation.

  Raises CompileError for models outside the engine's scope: free/ball
  joints, movable bodies without mass, planes off the world body. When the
  model was built in debug mode, errors carry the mutation site of the
  offending element.
  """
  if not isinstance(root, element_lib.RootElement):
    raise errors.CompileError('compile_model() expects a model root')
  return _Compiler(root).build()


def _fail(root, element, message):
  from ctrlforge.mjcf import debugging
  note = ''
  if root.debug_mode:
    site = root.provenance(element)
    if site:
      note = f' (element created at {site[0]}:{site[1]})'
    dump_dir = debugging.dump_dir()
    if dump_dir:
      index = root.dump_provenance(dump_dir)
      note += f' (full provenance dump written to {index})'
  elif element is not None:
    note = ' (re-run with CTRLFORGE_DEBUG=1 to trace the mutation site)'
  raise errors.CompileError(message + note)


def _resolved(el, name):
  """Attribute value from explicit/class settings only (no schema default)."""
  explicit = el.get_attribute(name)
  if explicit is not None:
    return explicit
  for default_el in el.root.default_chain(el.get_attribute('dclass'), el):
    tag_default = default_el.section_child(el.tag)
    if tag_default is not None:
      value = tag_default.get_attribute(name)
      if value is not None:
        return value
  return None


def _orientation(el):
  """World-format orientation quat of an element, honouring angle units."""
  explicit = el.explicit_attributes()
  if 'euler' in explicit and 'quat' in explicit:
    raise errors.SchemaViolationError(
        f'<{el.tag}>: specify at most one of euler/quat')
  if 'quat' in explicit:
    return rotations.quat_normalize(explicit['quat'])
  euler = _resolved(el, 'euler')
  if euler is not None:
    degrees = el.root.compiler.angle == 'degree'
    return rotations.euler_to_quat(euler, degrees=degrees)
  return rotations.quat_normalize(el.quat)


class _Compiler:

  def __init__(self, root):
    self.root = root
    self.bodies = []       # dicts
    self.joints = []
    self.geoms = []
    self.sites = []
    self.cameras = []
    self.lights = []
    self.actuators = []
    self.sensors = []
    self.element_map = {}
    self.element_refs = []
    self.joint_index_by_id = {}

  def build(self):
    options = serializer.effective_options(self.root)
    self._add_world()
    self._walk_body(self.root.worldbody, parent_index=0, frame_of=None)
    self._collect_actuators()
    self._collect_sensors()
    self._check_masses()
    return self._assemble(options)

  # -- tree walk -------------------------------------------------------------

  def _add_world(self):
    self.bodies.append(dict(
        element=self.root.worldbody, parent=-1,
        pos=np.zeros(3), quat=np.array([1.0, 0, 0, 0]),
        joints=[], name='world'))
    self._register(self.root.worldbody, 'body', 0)

  def _walk_body(self, body_el, parent_index, frame_of):
    del frame_of
    index = len(self.bodies) - 1 if body_el.tag == 'worldbody' else None
    if body_el.tag != 'worldbody':
      index = len(self.bodies)
      self.bodies.append(dict(
          element=body_el, parent=parent_index,
          pos=np.asarray(body_el.pos, dtype=float),
          quat=_orientation(body_el),
          joints=[], name=body_el.identifier_in(self.root)))
      self._register(body_el, 'body', index)
    else:
      index = 0
    for child in body_el.children:
      self._walk_body_child(child, index)
    attached = body_el.attached_model
    if attached is not None:
      for child in attached.worldbody.children:
        self._walk_body_child(child, index)

  def _walk_body_child(self, child, body_index):
    tag = child.tag
    if tag == 'body':
      self._walk_body(child, body_index, None)
    elif tag == 'joint':
      self._add_joint(child, body_index)
    elif tag == 'freejoint':
      _fail(self.root, child,
            'free joints are not supported by this engine; model planar '
            'bases as slide+slide+hinge chains')
    elif tag == 'geom':
      self._add_geom(child, body_index)
    elif tag == 'site':
      self._add_site(child, body_index)
    elif tag == 'camera':
      self._add_camera(child, body_index)
    elif tag == 'light':
      self._add_light(child, body_index)

  def _add_joint(self, el, body_index):
    if body_index == 0:
      _fail(self.root, el, 'joints may not be direct children of the world '
                           'body; wrap them in a <body>')
    kind = el.type
    jnt_type = model_lib.JNT_HINGE if kind == 'hinge' else model_lib.JNT_SLIDE
    axis = np.asarray(el.axis, dtype=float)
    norm = math.sqrt(float(axis @ axis))
    if norm == 0:
      _fail(self.root, el, 'joint axis must be non-zero')
    index = len(self.joints)
    self.joints.append(dict(
        element=el, body=body_index, type=jnt_type, axis=axis / norm,
        pos=np.asarray(el.pos, dtype=float),
        damping=float(el.damping), stiffness=float(el.stiffness),
        springref=float(el.springref),
        range=np.asarray(el.range, dtype=float),
        limited=el.limited == 'true',
        name=el.identifier_in(self.root)))
    self.bodies[body_index]['joints'].append(index)
    self._register(el, 'joint', index)
    self.joint_index_by_id[id(el)] = index

  def _add_geom(self, el, body_index):
    kind = inertia_lib.GEOM_TYPE_IDS[el.type]
    if kind == inertia_lib.GEOM_PLANE and body_index != 0:
      _fail(self.root, el, 'plane geoms are only allowed on the world body')
    pos, quat, size = self._geom_pose_and_size(el, kind)
    density = float(el.density)
    mass_attr = _resolved(el, 'mass')
    try:
      mass, _, rot_inertia = inertia_lib.geom_inertia(kind, size, density)
    except errors.CompileError as e:
      _fail(self.root, el, str(e))
    if mass_attr is not None:
      vol = inertia_lib.volume(kind, size)
      if vol <= 0:
        _fail(self.root, el, 'cannot set mass on a volume-less geom')
      scale = float(mass_attr) / (density * vol)
      mass = float(mass_attr)
      rot_inertia = rot_inertia * scale
    rgba, checker = self._geom_color(el)
    index = len(self.geoms)
    self.geoms.append(dict(
        element=el, body=body_index, type=kind, pos=pos, quat=quat,
        size=size, mass=mass,
        rot_inertia=rot_inertia, rgba=rgba, checker=checker,
        fluidcoef=float(el.fluidcoef), group=int(el.group),
        name=el.identifier_in(self.root)))
    self._register(el, 'geom', index)

  def _geom_pose_and_size(self, el, kind):
    size_attr = _resolved(el, 'size')
    fromto = _resolved(el, 'fromto')
    if fromto is not None:
      if kind not in (inertia_lib.GEOM_CAPSULE, inertia_lib.GEOM_CYLINDER):
        _fail(self.root, el, 'fromto is only supported for capsules and '
                             'cylinders')
      if size_attr is None or len(size_attr) < 1:
        _fail(self.root, el, 'fromto geoms need size="radius"')
      a = np.asarray(fromto[:3], dtype=float)
      b = np.asarray(fromto[3:], dtype=float)
      direction = b - a
      length = math.sqrt(float(direction @ direction))
      if length <= 0:
        _fail(self.root, el, 'fromto endpoints must differ')
      pos = 0.5 * (a + b)
      quat = rotations.quat_between_vectors([0.0, 0.0, 1.0], direction)
      size = np.array([float(size_attr[0]), 0.5 * length, 0.0])
      return pos, quat, size
    pos = np.asarray(el.pos, dtype=float)
    quat = _orientation(el)
    if size_attr is None:
      _fail(self.root, el, f'geom of type {el.type} needs a size')
    size_attr = np.asarray(size_attr, dtype=float)
    if kind == inertia_lib.GEOM_SPHERE:
      size = np.array([size_attr[0], 0.0, 0.0])
    elif kind in (inertia_lib.GEOM_CAPSULE, inertia_lib.GEOM_CYLINDER):
      if size_attr.size < 2:
        _fail(self.root, el, f'{el.type} needs size="radius half-length"')
      size = np.array([size_attr[0], size_attr[1], 0.0])
    else:  # box, ellipsoid, plane: three half-sizes with scalar broadcast
      if size_attr.size == 1:
        size = np.full(3, float(size_attr[0]))
      elif size_attr.size == 3:
        size = size_attr.astype(float)
      else:
        _fail(self.root, el, f'{el.type} needs one or three sizes')
    return pos, quat, size

  def _geom_color(self, el):
    rgba = _resolved(el, 'rgba')
    if rgba is not None:
      return np.asarray(rgba, dtype=float), None
    material = _resolved(el, 'material')
    if material is not None:
      mat_rgba = _resolved(material, 'rgba')
      if mat_rgba is not None:
        return np.asarray(mat_rgba, dtype=float), None
      texture = _resolved(material, 'texture')
      if texture is not None and texture.builtin == 'checker':
        checker = (np.asarray(texture.rgb1, dtype=float),
                   np.asarray(texture.rgb2, dtype=float))
        return np.array([*checker[0], 1.0]), checker
    return np.asarray(el.rgba, dtype=float), None

  def _add_site(self, el, body_index):
    size = np.asarray(el.size, dtype=float)
    if size.size == 1:
      size = np.full(3, float(size[0]))
    elif size.size == 2:
      size = np.array([size[0], size[1], 0.0])
    index = len(self.sites)
    self.sites.append(dict(
        element=el, body=body_index,
        pos=np.asarray(el.pos, dtype=float), quat=_orientation(el),
        size=size, rgba=np.asarray(el.rgba, dtype=float),
        type=el.type, group=int(el.group),
        name=el.identifier_in(self.root)))
    self._register(el, 'site', index)

  def _add_camera(self, el, body_index):
    index = len(self.cameras)
    self.cameras.append(dict(
        element=el, body=body_index,
        pos=np.asarray(el.pos, dtype=float), quat=_orientation(el),
        fovy=float(el.fovy), name=el.identifier_in(self.root)))
    self._register(el, 'camera', index)

  def _add_light(self, el, body_index):
    index = len(self.lights)
    self.lights.append(dict(
        element=el, body=body_index,
        pos=np.asarray(el.pos, dtype=float),
        dir=np.asarray(el.dir, dtype=float),
        name=el.identifier_in(self.root)))
    self._register(el, 'light', index)

  def _collect_actuators(self):
    for el in self.root.find_all('actuator'):
      joint_el = el.joint
      if joint_el is None:
        _fail(self.root, el, f'<{el.tag}> needs a joint')
      joint_index = self.joint_index_by_id.get(id(joint_el))
      if joint_index is None:
        _fail(self.root, el, f'<{el.tag}> references a joint outside the '
                             'compiled model')
      kind = (model_lib.ACT_MOTOR if el.tag == 'motor'
              else model_lib.ACT_POSITION)
      ctrlrange = _resolved(el, 'ctrlrange')
      index = len(self.actuators)
      self.actuators.append(dict(
          element=el, kind=kind, joint=joint_index,
          gear=float(el.gear) if el.tag == 'motor' else 1.0,
          kp=float(el.kp) if el.tag == 'position' else 0.0,
          kv=float(el.kv) if el.tag == 'position' else 0.0,
          ctrlrange=(np.asarray(ctrlrange, dtype=float)
                     if ctrlrange is not None else None),
          name=el.identifier_in(self.root)))
      self._register(el, 'actuator', index)

  def _collect_sensors(self):
    for el in self.root.find_all('sensor'):
      joint_el = el.joint
      if joint_el is None:
        _fail(self.root, el, f'<{el.tag}> needs a joint')
      joint_index = self.joint_index_by_id.get(id(joint_el))
      if joint_index is None:
        _fail(self.root, el, f'<{el.tag}> references a joint outside the '
                             'compiled model')
      kind = (model_lib.SENSOR_JOINTPOS if el.tag == 'jointpos'
              else model_lib.SENSOR_JOINTVEL)
      index = len(self.sensors)
      self.sensors.append(dict(element=el, kind=kind, joint=joint_index,
                               name=el.identifier_in(self.root)))
      self._register(el, 'sensor', index)

  def _check_masses(self):
    nb = len(self.bodies)
    subtree_mass = np.zeros(nb)
    for i, body in enumerate(self.bodies):
      subtree_mass[i] = sum(g['mass'] for g in self.geoms
                            if g['body'] == i)
    for i in range(nb - 1, 0, -1):
      subtree_mass[self.bodies[i]['parent']] += subtree_mass[i]
    for joint in self.joints:
      if subtree_mass[joint['body']] <= 0.0:
        _fail(self.root, joint['element'],
              f"joint '{joint['name']}' moves a zero-mass subtree")

  def _register(self, el, namespace, index):
    self.element_map[id(el)] = (namespace, index)
    self.element_refs.append(el)

  # -- assembly ----------------------------------------------------------------

  def _assemble(self, options):
    nb = len(self.bodies)
    nj = len(self.joints)
    bodies, joints, geoms = self.bodies, self.joints, self.geoms

    body_parent = np.array([b['parent'] for b in bodies], dtype=int)
    body_pos = np.array([b['pos'] for b in bodies])
    body_quat = np.array([b['quat'] for b in bodies])
    body_jntadr = np.full(nb, -1, dtype=int)
    body_jntnum = np.zeros(nb, dtype=int)
    for i, b in enumerate(bodies):
      if b['joints']:
        body_jntadr[i] = b['joints'][0]
        body_jntnum[i] = len(b['joints'])

    # Aggregate geom masses into per-body mass properties.
    body_mass = np.zeros(nb)
    body_com = np.zeros((nb, 3))
    body_inertia = np.zeros((nb, 3, 3))
    for g in geoms:
      b = g['body']
      body_mass[b] += g['mass']
      body_com[b] += g['mass'] * g['pos']
    nonzero = body_mass > 0
    body_com[nonzero] /= body_mass[nonzero, None]
    for g in geoms:
      b = g['body']
      if g['mass'] == 0:
        continue
      rot = rotations.quat_to_mat(g['quat'])
      inert_world = rot @ g['rot_inertia'] @ rot.T
      d = g['pos'] - body_com[b]
      shift = g['mass'] * (float(d @ d) * np.eye(3) - np.outer(d, d))
      body_inertia[b] += inert_world + shift

    # Per-dof tree structure: dof index == joint index (all joints 1-dof).
    body_last_dof = np.full(nb, -1, dtype=int)
    for i in range(1, nb):
      parent = body_parent[i]
      body_last_dof[i] = (bodies[i]['joints'][-1] if bodies[i]['joints']
                          else body_last_dof[parent])
    dof_parent = np.full(nj, -1, dtype=int)
    for i, b in enumerate(bodies):
      for k, j in enumerate(b['joints']):
        dof_parent[j] = b['joints'][k - 1] if k > 0 else (
            body_last_dof[body_parent[i]])

    name_tables = {}
    for namespace, items in (
        ('body', bodies), ('joint', joints), ('geom', geoms),
        ('site', self.sites), ('camera', self.cameras),
        ('light', self.lights), ('actuator', self.actuators),
        ('sensor', self.sensors)):
      names = [item['name'] for item in items]
      name_tables[namespace] = (names, {n: i for i, n in enumerate(names)})

    nu = len(self.actuators)
    ctrlrange = np.full((nu, 2), (-np.inf, np.inf))
    ctrllimited = np.zeros(nu, dtype=bool)
    for i, a in enumerate(self.actuators):
      if a['ctrlrange'] is not None:
        ctrlrange[i] = a['ctrlrange']
        ctrllimited[i] = True

    def column(items, name, dtype=float, width=None):
      if not items:
        if width is None:
          return np.zeros(0, dtype=dtype)
        return np.zeros((0, width), dtype=dtype)
      return np.array([item[name] for item in items], dtype=dtype)

    integrator = options.get(('option', 'integrator'), 'euler')
    gravity = np.asarray(
        options.get(('option', 'gravity'), (0.0, 0.0, -9.81)), dtype=float)
    timestep = float(options.get(('option', 'timestep'), 0.002))
    if timestep <= 0:
      raise errors.CompileError('option timestep must be positive')
    fluid_density = float(options.get(('option', 'density'), 0.0))

    return model_lib.CompiledModel(
        source_model=self.root,
        model_name=self.root.model_name,
        nbody=nb, njnt=nj, nq=nj, nv=nj, nu=nu,
        ngeom=len(geoms), nsite=len(self.sites),
        ncam=len(self.cameras), nlight=len(self.lights),
        nsensor=len(self.sensors), nsensordata=len(self.sensors),
        body_parent=body_parent, body_pos=body_pos, body_quat=body_quat,
        body_jntadr=body_jntadr, body_jntnum=body_jntnum,
        body_jnt=[tuple(b['joints']) for b in bodies],
        body_mass=body_mass, body_com=body_com, body_inertia=body_inertia,
        body_last_dof=body_last_dof,
        jnt_body=column(joints, 'body', int),
        jnt_type=column(joints, 'type', int),
        jnt_axis=column(joints, 'axis', float, 3),
        jnt_pos=column(joints, 'pos', float, 3),
        jnt_damping=column(joints, 'damping'),
        jnt_stiffness=column(joints, 'stiffness'),
        jnt_springref=column(joints, 'springref'),
        jnt_range=column(joints, 'range', float, 2),
        jnt_limited=column(joints, 'limited', bool),
        dof_parent=dof_parent,
        geom_body=column(geoms, 'body', int),
        geom_type=column(geoms, 'type', int),
        geom_pos=column(geoms, 'pos', float, 3),
        geom_quat=column(geoms, 'quat', float, 4),
        geom_size=column(geoms, 'size', float, 3),
        geom_mass=column(geoms, 'mass'),
        geom_rgba=column(geoms, 'rgba', float, 4),
        geom_checker=[g['checker'] for g in geoms],
        geom_fluidcoef=column(geoms, 'fluidcoef'),
        geom_group=column(geoms, 'group', int),
        site_body=column(self.sites, 'body', int),
        site_pos=column(self.sites, 'pos', float, 3),
        site_quat=column(self.sites, 'quat', float, 4),
        site_size=column(self.sites, 'size', float, 3),
        site_rgba=column(self.sites, 'rgba', float, 4),
        cam_body=column(self.cameras, 'body', int),
        cam_pos=column(self.cameras, 'pos', float, 3),
        cam_quat=column(self.cameras, 'quat', float, 4),
        cam_fovy=column(self.cameras, 'fovy'),
        light_body=column(self.lights, 'body', int),
        light_pos=column(self.lights, 'pos', float, 3),
        light_dir=column(self.lights, 'dir', float, 3),
        act_kind=column(self.actuators, 'kind', int),
        act_joint=column(self.actuators, 'joint', int),
        act_gear=column(self.actuators, 'gear'),
        act_kp=column(self.actuators, 'kp'),
        act_kv=column(self.actuators, 'kv'),
        act_ctrlrange=ctrlrange,
        act_ctrllimited=ctrllimited,
        sensor_kind=column(self.sensors, 'kind', int),
        sensor_joint=column(self.sensors, 'joint', int),
        gravity=gravity,
        timestep=timestep,
        integrator=integrator,
        fluid_density=fluid_density,
        name_tables=name_tables,
        element_map=self.element_map,
        element_refs=tuple(self.element_refs),
    )
