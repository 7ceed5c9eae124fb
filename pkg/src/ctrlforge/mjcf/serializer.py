"""Deterministic XML emission for model trees.

Attached models are flattened into a single document: their world-body
content appears under the attachment frame, identifiers carry namespace
prefixes, assets/actuators/sensors are merged into the host sections and
default classes nest under the host's root class. Orientations given as
`euler` are canonicalized to `quat` so the emitted document is unit-free.
Serializing twice, or serializing a reparsed document, yields an identical
string.
"""

import xml.etree.ElementTree as ET

import numpy as np

from ctrlforge import errors
from ctrlforge.mjcf import element as element_lib
from ctrlforge.mjcf import schema


def to_xml_string(root) -> str:
  referenced = _referenced_elements(root)
  doc = ET.Element('mujoco')
  doc.set('model', root.model_name)
  _emit_compiler(doc, root)
  _emit_option(doc, root)
  _emit_defaults(doc, root)
  _emit_assets(doc, root, referenced)
  worldbody = ET.SubElement(doc, 'worldbody')
  _emit_body_content(worldbody, root.worldbody, root, referenced)
  _emit_section(doc, root, 'actuator', referenced)
  _emit_section(doc, root, 'sensor', referenced)
  ET.indent(doc, space='  ')
  return ET.tostring(doc, encoding='unicode') + '\n'


def effective_options(root):
  """Explicit <option>/<compiler> settings merged across attached models.

  Conflicting explicit values are an error; an attribute set in exactly one
  model applies to the whole composition.
  """
  merged = {}
  sources = {}
  for model in _all_roots(root):
    for section in ('option', 'compiler'):
      section_el = model.section_child(section)
      if section_el is None:
        continue
      for name, value in section_el.explicit_attributes().items():
        key = (section, name)
        if key in merged and not _values_equal(merged[key], value):
          raise errors.CompileError(
              f"conflicting <{section}> {name}: '{_fmt(merged[key])}' in "
              f"model '{sources[key]}' vs '{_fmt(value)}' in model "
              f"'{model.model_name}'")
        if key not in merged:
          merged[key] = value
          sources[key] = model.model_name
  return merged


def _all_roots(root):
  yield root
  for _, _, child in root.attachments:
    yield from _all_roots(child)


def _values_equal(a, b):
  if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
    return np.array_equal(a, b)
  return a == b


def _emit_compiler(doc, root):
  compiler = root.section_child('compiler')
  explicit = compiler.explicit_attributes() if compiler is not None else {}
  # Angles are canonicalized to quaternions below, so `angle` only records
  # the authoring unit; keep it for round-trip stability of the setting.
  if explicit:
    et = ET.SubElement(doc, 'compiler')
    _set_attrs(et, 'compiler', explicit, root, root)


def _emit_option(doc, root):
  merged = {name: value for (section, name), value
            in effective_options(root).items() if section == 'option'}
  if merged:
    et = ET.SubElement(doc, 'option')
    _set_attrs(et, 'option', merged, root, root)


def _emit_defaults(doc, root):
  et = ET.Element('default')
  _fill_default_class(et, root, root, prefix='')
  if len(et) or et.attrib:
    doc.append(et)


def _fill_default_class(et, model, ser_root, prefix):
  """Emits `model`'s root default content plus attached classes into `et`."""
  own = model.section_child('default')
  if own is not None:
    _emit_default_children(et, own, prefix)
  for child_prefix, _, child in model.attachments:
    if not _has_default_content(child):
      continue
    child_et = ET.SubElement(et, 'default')
    child_et.set('class', prefix + child_prefix)
    _fill_default_class(child_et, child, ser_root, prefix + child_prefix)


def _emit_default_children(et, default_el, prefix):
  for child in default_el.children:
    if child.tag == 'default':
      sub = ET.SubElement(et, 'default')
      sub.set('class', prefix + (child.get_attribute('dclass') or ''))
      _emit_default_children(sub, child, prefix)
    else:
      explicit = child.explicit_attributes()
      if not explicit:
        continue
      sub = ET.SubElement(et, child.tag)
      _set_attrs(sub, child.tag, explicit, child.root, child.root,
                 skip=('dclass', 'name'))


def _has_default_content(model):
  own = model.section_child('default')
  if own is not None:
    for child in own.iter_tree():
      if child is not own and child.explicit_attributes():
        return True
  return any(_has_default_content(c) for _, _, c in model.attachments)


def _emit_assets(doc, root, referenced):
  et = ET.Element('asset')
  for model in _all_roots(root):
    section = model.section_child('asset')
    if section is None:
      continue
    for child in section.children:
      sub = ET.SubElement(et, child.tag)
      _emit_element_attrs(sub, child, root, referenced)
  if len(et):
    doc.append(et)


def _emit_section(doc, root, section_name, referenced):
  et = ET.Element(section_name)
  for model in _all_roots(root):
    section = model.section_child(section_name)
    if section is None:
      continue
    for child in section.children:
      sub = ET.SubElement(et, child.tag)
      _emit_element_attrs(sub, child, root, referenced)
  if len(et):
    doc.append(et)


def _emit_body_content(et, body_el, ser_root, referenced):
  for child in body_el.children:
    sub = ET.SubElement(et, child.tag)
    _emit_element_attrs(sub, child, ser_root, referenced)
    if child.tag == 'body':
      _emit_body_content(sub, child, ser_root, referenced)
      if child.attached_model is not None:
        _emit_body_content(sub, child.attached_model.worldbody, ser_root,
                           referenced)


def _emit_element_attrs(et, el, ser_root, referenced):
  explicit = el.explicit_attributes()
  forced_name = None
  # Elements that are referenced must carry a serialized name even if the
  # user never named them.
  if 'name' not in explicit and el.namespace is not None and el in referenced:
    forced_name = el.identifier_in(ser_root)
  forced_dclass = None
  if ('dclass' not in explicit and el.root is not ser_root
      and _has_default_content(el.root)
      and el.tag in schema.tag_spec('default').children):
    # Attached elements keep their model's defaults via the '<prefix>/'
    # class emitted by _emit_defaults.
    forced_dclass = el.root.prefix_path_from(ser_root)
  _set_attrs(et, el.tag, explicit, el.root, ser_root,
             forced_name=forced_name, forced_dclass=forced_dclass)


def _set_attrs(et, tag, explicit, owner_root, ser_root, skip=(),
               forced_name=None, forced_dclass=None):
  spec = schema.tag_spec(tag)
  if 'euler' in explicit and 'quat' in explicit:
    raise errors.SchemaViolationError(
        f'<{tag}>: specify at most one of euler/quat')
  emitted_quat = False
  for attr in spec.attributes:
    if attr.name in skip:
      continue
    if attr.name not in explicit:
      if attr.name == 'name' and forced_name is not None:
        et.set('name', forced_name)
      elif attr.name == 'dclass' and forced_dclass is not None:
        et.set('class', forced_dclass)
      continue
    value = explicit[attr.name]
    if attr.name == 'euler':
      quat = element_lib._orientation_quat_from(
          value, owner_root.compiler.angle == 'degree')
      et.set('quat', _fmt(quat))
      emitted_quat = True
      continue
    if attr.name == 'quat':
      if emitted_quat:
        raise errors.SchemaViolationError(
            f'<{tag}>: specify at most one of euler/quat')
      et.set('quat', _fmt(value))
      continue
    if attr.name == 'name':
      et.set('name', owner_root.prefix_path_from(ser_root) + value)
      continue
    if attr.name == 'dclass':
      et.set('class', owner_root.prefix_path_from(ser_root) + value)
      continue
    if attr.kind is schema.AttrKind.REFERENCE:
      et.set(attr.serialized_name, value.identifier_in(ser_root))
      continue
    et.set(attr.serialized_name, _fmt(value))


def _referenced_elements(ser_root):
  """All elements referenced by some reference attribute in the document."""
  targets = set()
  for model in _all_roots(ser_root):
    for el in model.iter_elements():
      spec = schema.tag_spec(el.tag)
      for attr in spec.attributes:
        if attr.kind is schema.AttrKind.REFERENCE:
          value = el.get_attribute(attr.name)
          if value is not None:
            targets.add(id(value))
  return _IdSet(targets)


class _IdSet:

  def __init__(self, ids):
    self._ids = ids

  def __contains__(self, obj):
    return id(obj) in self._ids


def _fmt(value):
  if isinstance(value, np.ndarray):
    return ' '.join(_fmt_float(float(v)) for v in value)
  if isinstance(value, float):
    return _fmt_float(value)
  if isinstance(value, (int, np.integer)):
    return str(int(value))
  return str(value)


def _fmt_float(v):
  if v == int(v) and abs(v) < 1e16:
    return str(int(v))
  return repr(v)
