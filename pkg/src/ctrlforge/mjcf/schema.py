"""Schema for the supported subset of the MJCF modelling language.

The schema drives attribute validation, default resolution, reference
handling and deterministic serialization. Tags and attributes outside this
table are rejected as schema violations.
"""

import dataclasses
import enum
from typing import Optional, Tuple

import numpy as np


class AttrKind(enum.Enum):
  KEYWORD = 'keyword'
  STRING = 'string'
  FLOAT = 'float'
  INT = 'int'
  ARRAY = 'array'
  REFERENCE = 'reference'


@dataclasses.dataclass(frozen=True)
class AttrSpec:
  """Declaration of a single attribute.

  For ARRAY attributes `length` is the canonical length and `min_length`
  the shortest accepted input (scalar broadcast, variable-length `size`).
  For REFERENCE attributes `namespace` names the kind the reference must
  resolve to. KEYWORD attributes list their valid `choices`.
  """
  name: str
  kind: AttrKind
  length: int = 1
  min_length: Optional[int] = None
  choices: Optional[Tuple[str, ...]] = None
  namespace: Optional[str] = None
  default: object = None
  # XML spelling when it differs from the Python-level name (`dclass`).
  xml_name: Optional[str] = None

  @property
  def serialized_name(self):
    return self.xml_name or self.name


@dataclasses.dataclass(frozen=True)
class TagSpec:
  name: str
  attributes: Tuple[AttrSpec, ...]
  children: Tuple[str, ...]
  namespace: Optional[str] = None    # identifier namespace, if the tag is named
  # Tags that appear at most once under their parent (section singletons).
  singleton: bool = False


def _a(name, kind, **kw):
  return AttrSpec(name=name, kind=kind, **kw)


def _name():
  return _a('name', AttrKind.STRING)


def _dclass():
  return _a('dclass', AttrKind.STRING, xml_name='class')


_POSE_ATTRS = (
    _a('pos', AttrKind.ARRAY, length=3, default=(0.0, 0.0, 0.0)),
    _a('quat', AttrKind.ARRAY, length=4, default=(1.0, 0.0, 0.0, 0.0)),
    _a('euler', AttrKind.ARRAY, length=3),
)

GEOM_TYPES = ('plane', 'sphere', 'capsule', 'cylinder', 'box', 'ellipsoid')
SITE_TYPES = ('sphere', 'capsule', 'cylinder', 'box')

_TAGS = (
    TagSpec(
        'mujoco',
        attributes=(_a('model', AttrKind.STRING, default='model'),),
        children=('compiler', 'option', 'default', 'asset', 'worldbody',
                  'actuator', 'sensor'),
    ),
    TagSpec(
        'compiler',
        attributes=(
            _a('angle', AttrKind.KEYWORD, choices=('degree', 'radian'),
               default='degree'),
        ),
        children=(),
        singleton=True,
    ),
    TagSpec(
        'option',
        attributes=(
            _a('timestep', AttrKind.FLOAT, default=0.002),
            _a('gravity', AttrKind.ARRAY, length=3,
               default=(0.0, 0.0, -9.81)),
            _a('integrator', AttrKind.KEYWORD, choices=('euler', 'rk4'),
               default='euler'),
            _a('density', AttrKind.FLOAT, default=0.0),
        ),
        children=(),
        singleton=True,
    ),
    TagSpec(
        'default',
        attributes=(_dclass(),),
        children=('default', 'joint', 'geom', 'site', 'motor', 'position',
                  'camera', 'light'),
        singleton=False,
    ),
    TagSpec('asset', attributes=(), children=('texture', 'material'),
            singleton=True),
    TagSpec(
        'texture',
        attributes=(
            _name(),
            _a('type', AttrKind.KEYWORD, choices=('2d',), default='2d'),
            _a('builtin', AttrKind.KEYWORD, choices=('checker', 'flat'),
               default='flat'),
            _a('rgb1', AttrKind.ARRAY, length=3, default=(0.8, 0.8, 0.8)),
            _a('rgb2', AttrKind.ARRAY, length=3, default=(0.5, 0.5, 0.5)),
            _a('width', AttrKind.INT, default=1),
            _a('height', AttrKind.INT, default=1),
        ),
        children=(),
        namespace='texture',
    ),
    TagSpec(
        'material',
        attributes=(
            _name(),
            _a('texture', AttrKind.REFERENCE, namespace='texture'),
            _a('texrepeat', AttrKind.ARRAY, length=2, default=(1.0, 1.0)),
            _a('rgba', AttrKind.ARRAY, length=4),
            _a('reflectance', AttrKind.FLOAT, default=0.0),
        ),
        children=(),
        namespace='material',
    ),
    TagSpec(
        'worldbody',
        attributes=(),
        children=('body', 'geom', 'site', 'light', 'camera'),
        singleton=True,
        namespace='body',
    ),
    TagSpec(
        'body',
        attributes=(_name(),) + _POSE_ATTRS,
        children=('body', 'joint', 'freejoint', 'geom', 'site', 'light',
                  'camera'),
        namespace='body',
    ),
    TagSpec(
        'joint',
        attributes=(
            _name(),
            _dclass(),
            _a('type', AttrKind.KEYWORD, choices=('hinge', 'slide'),
               default='hinge'),
            _a('pos', AttrKind.ARRAY, length=3, default=(0.0, 0.0, 0.0)),
            _a('axis', AttrKind.ARRAY, length=3, default=(0.0, 0.0, 1.0)),
            _a('damping', AttrKind.FLOAT, default=0.0),
            _a('stiffness', AttrKind.FLOAT, default=0.0),
            _a('springref', AttrKind.FLOAT, default=0.0),
            _a('range', AttrKind.ARRAY, length=2, default=(0.0, 0.0)),
            _a('limited', AttrKind.KEYWORD, choices=('true', 'false'),
               default='false'),
        ),
        children=(),
        namespace='joint',
    ),
    TagSpec('freejoint', attributes=(_name(),), children=(),
            namespace='joint'),
    TagSpec(
        'geom',
        attributes=(
            _name(),
            _dclass(),
            _a('type', AttrKind.KEYWORD, choices=GEOM_TYPES,
               default='sphere'),
            _a('pos', AttrKind.ARRAY, length=3, default=(0.0, 0.0, 0.0)),
            _a('quat', AttrKind.ARRAY, length=4,
               default=(1.0, 0.0, 0.0, 0.0)),
            _a('euler', AttrKind.ARRAY, length=3),
            _a('size', AttrKind.ARRAY, length=3, min_length=1),
            _a('fromto', AttrKind.ARRAY, length=6),
            _a('rgba', AttrKind.ARRAY, length=4,
               default=(0.5, 0.5, 0.5, 1.0)),
            _a('density', AttrKind.FLOAT, default=1000.0),
            _a('mass', AttrKind.FLOAT),
            _a('material', AttrKind.REFERENCE, namespace='material'),
            _a('group', AttrKind.INT, default=0),
            _a('fluidcoef', AttrKind.FLOAT, default=1.0),
        ),
        children=(),
        namespace='geom',
    ),
    TagSpec(
        'site',
        attributes=(
            _name(),
            _dclass(),
            _a('type', AttrKind.KEYWORD, choices=SITE_TYPES,
               default='sphere'),
            _a('pos', AttrKind.ARRAY, length=3, default=(0.0, 0.0, 0.0)),
            _a('quat', AttrKind.ARRAY, length=4,
               default=(1.0, 0.0, 0.0, 0.0)),
            _a('euler', AttrKind.ARRAY, length=3),
            _a('size', AttrKind.ARRAY, length=3, min_length=1,
               default=(0.005, 0.005, 0.005)),
            _a('rgba', AttrKind.ARRAY, length=4,
               default=(0.5, 0.5, 0.5, 1.0)),
            _a('group', AttrKind.INT, default=0),
        ),
        children=(),
        namespace='site',
    ),
    TagSpec(
        'light',
        attributes=(
            _name(),
            _dclass(),
            _a('pos', AttrKind.ARRAY, length=3, default=(0.0, 0.0, 1.0)),
            _a('dir', AttrKind.ARRAY, length=3, default=(0.0, 0.0, -1.0)),
        ),
        children=(),
        namespace='light',
    ),
    TagSpec(
        'camera',
        attributes=(
            _name(),
            _dclass(),
            _a('pos', AttrKind.ARRAY, length=3, default=(0.0, 0.0, 0.0)),
            _a('quat', AttrKind.ARRAY, length=4,
               default=(1.0, 0.0, 0.0, 0.0)),
            _a('euler', AttrKind.ARRAY, length=3),
            _a('fovy', AttrKind.FLOAT, default=45.0),
        ),
        children=(),
        namespace='camera',
    ),
    TagSpec('actuator', attributes=(), children=('motor', 'position'),
            singleton=True),
    TagSpec(
        'motor',
        attributes=(
            _name(),
            _dclass(),
            _a('joint', AttrKind.REFERENCE, namespace='joint'),
            _a('gear', AttrKind.FLOAT, default=1.0),
            _a('ctrlrange', AttrKind.ARRAY, length=2),
        ),
        children=(),
        namespace='actuator',
    ),
    TagSpec(
        'position',
        attributes=(
            _name(),
            _dclass(),
            _a('joint', AttrKind.REFERENCE, namespace='joint'),
            _a('kp', AttrKind.FLOAT, default=1.0),
            _a('kv', AttrKind.FLOAT, default=0.0),
            _a('ctrlrange', AttrKind.ARRAY, length=2),
        ),
        children=(),
        namespace='actuator',
    ),
    TagSpec('sensor', attributes=(), children=('jointpos', 'jointvel'),
            singleton=True),
    TagSpec(
        'jointpos',
        attributes=(_name(), _a('joint', AttrKind.REFERENCE,
                                namespace='joint')),
        children=(),
        namespace='sensor',
    ),
    TagSpec(
        'jointvel',
        attributes=(_name(), _a('joint', AttrKind.REFERENCE,
                                namespace='joint')),
        children=(),
        namespace='sensor',
    ),
)

TAGS = {t.name: t for t in _TAGS}

# Sections of <mujoco> that exist implicitly and at most once.
ROOT_SECTIONS = ('compiler', 'option', 'default', 'asset', 'worldbody',
                 'actuator', 'sensor')

# Namespaces usable with find()/find_all().
NAMESPACES = ('body', 'joint', 'geom', 'site', 'camera', 'light', 'actuator',
              'sensor', 'material', 'texture')


def tag_spec(tag: str) -> TagSpec:
  try:
    return TAGS[tag]
  except KeyError:
    raise SchemaError(f"unknown element kind '{tag}'") from None


def attr_spec(tag: str, attr: str) -> AttrSpec:
  spec = tag_spec(tag)
  for a in spec.attributes:
    if a.name == attr:
      return a
  raise SchemaError(f"'{attr}' is not a valid attribute of <{tag}>")


def attr_spec_by_xml_name(tag: str, xml_name: str) -> AttrSpec:
  spec = tag_spec(tag)
  for a in spec.attributes:
    if a.serialized_name == xml_name:
      return a
  raise SchemaError(f"'{xml_name}' is not a valid attribute of <{tag}>")


class SchemaError(ValueError):
  """A tag or attribute fell outside the supported schema."""


def coerce(tag: str, spec: AttrSpec, value):
  """Validates and normalizes an attribute value. Returns the stored form."""
  if value is None:
    raise SchemaError(f'<{tag}> {spec.name}: cannot assign None')
  if spec.kind is AttrKind.KEYWORD:
    value = str(value)
    if value not in spec.choices:
      raise SchemaError(
          f"<{tag}> {spec.name}: '{value}' is not one of {spec.choices}")
    return value
  if spec.kind is AttrKind.STRING:
    value = str(value)
    if spec.name == 'name':
      _check_raw_name(tag, value)
    return value
  if spec.kind is AttrKind.FLOAT:
    return float(value)
  if spec.kind is AttrKind.INT:
    return int(value)
  if spec.kind is AttrKind.ARRAY:
    if isinstance(value, str):
      value = [float(tok) for tok in value.split()]
    arr = np.asarray(value, dtype=float).ravel()
    min_len = spec.min_length or spec.length
    if arr.size == 1 and spec.length > 1 and min_len == 1:
      pass  # variable-length attribute: single scalar accepted as-is
    elif arr.size == 1 and spec.length > 1 and min_len == spec.length:
      arr = np.full(spec.length, float(arr[0]))  # scalar broadcast
    elif not min_len <= arr.size <= spec.length:
      raise SchemaError(
          f'<{tag}> {spec.name}: expected {spec.length} values, '
          f'got {arr.size}')
    arr.flags.writeable = False
    return arr
  if spec.kind is AttrKind.REFERENCE:
    return value  # resolved by the element layer (Element or name string)
  raise AssertionError(spec.kind)


def _check_raw_name(tag, value):
  if not value:
    raise SchemaError(f'<{tag}>: name must be non-empty')
  if '/' in value:
    raise SchemaError(
        f"<{tag}>: name '{value}' may not contain '/' (reserved as the "
        'namespace separator)')
  if any(c.isspace() for c in value):
    raise SchemaError(f"<{tag}>: name '{value}' may not contain whitespace")
