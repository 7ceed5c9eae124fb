"""Object model for the XML articulated-body description language.

Elements form a mutable tree rooted at a `RootElement`. Schema attributes
are exposed as Python attributes (`geom.size`, `joint.damping = 2`), with
reads falling back to the element's default class chain and finally the
schema default. Models compose with `attach()`, which keeps the composed
namespaces collision-free by prefixing the child's identifiers.
"""

import numpy as np

from ctrlforge import errors
from ctrlforge.mjcf import debugging
from ctrlforge.mjcf import schema

# Tags whose presence under a parent is implicit and unique, exposed as
# auto-created properties (model.worldbody, model.default.joint, ...).
_SECTION_PARENTS = ('mujoco', 'default')


def namespace_of(tag: str):
  return schema.tag_spec(tag).namespace


class Element:
  """A single model element: tag, attributes and children."""

  def __init__(self, tag, root, parent):
    spec = schema.tag_spec(tag)
    object.__setattr__(self, '_spec', spec)
    object.__setattr__(self, '_tag', tag)
    object.__setattr__(self, '_root', root)
    object.__setattr__(self, '_parent', parent)
    object.__setattr__(self, '_children', [])
    object.__setattr__(self, '_attributes', {})
    object.__setattr__(self, '_attached_root', None)

  # -- identity ------------------------------------------------------------

  @property
  def tag(self):
    return self._tag

  @property
  def parent(self):
    return self._parent

  @property
  def root(self):
    return self._root

  @property
  def namespace(self):
    return self._spec.namespace

  @property
  def attached_model(self):
    """The model attached at this element, if it is an attachment frame."""
    return self._attached_root

  @property
  def full_identifier(self):
    """Identifier of this element relative to the outermost model root."""
    return self.identifier_in(self._root.outermost_root())

  def identifier_in(self, root):
    """Identifier relative to `root`, prefixed along the attachment chain."""
    name = self.get_attribute('name')
    if name is None:
      name = self._root.synthesized_name(self)
    prefix = self._root.prefix_path_from(root)
    return prefix + name

  # -- attributes ----------------------------------------------------------

  def __getattr__(self, name):
    # Only called when normal lookup fails: schema attributes and sections.
    if name.startswith('_'):
      raise AttributeError(name)
    if self._tag in _SECTION_PARENTS and name in self._spec.children:
      if not (self._tag == 'default' and name == 'default'):
        return self._get_or_create_section(name)
    try:
      spec = schema.attr_spec(self._tag, name)
    except schema.SchemaError:
      raise AttributeError(
          f"<{self._tag}> has no attribute or section '{name}'") from None
    return self._resolve_attribute(spec)

  def __setattr__(self, name, value):
    if name.startswith('_'):
      object.__setattr__(self, name, value)
      return
    self.set_attribute(name, value)

  def get_attribute(self, name):
    """Returns the explicitly set value of `name`, or None."""
    return self._attributes.get(name)

  def explicit_attributes(self):
    return dict(self._attributes)

  def set_attribute(self, name, value):
    try:
      spec = schema.attr_spec(self._tag, name)
    except schema.SchemaError as e:
      raise errors.SchemaViolationError(str(e)) from None
    if spec.kind is schema.AttrKind.REFERENCE:
      value = self._resolve_reference(spec, value)
    else:
      try:
        value = schema.coerce(self._tag, spec, value)
      except schema.SchemaError as e:
        raise errors.SchemaViolationError(str(e)) from None
    if name == 'name':
      self._root.check_name_free(self, value)
    self._attributes[name] = value
    self._root.record_mutation(self, name)

  def remove_attribute(self, name):
    """Removes an explicit value; reads then fall back to defaults again."""
    self._attributes.pop(name, None)
    self._root.record_mutation(self, name)

  def _resolve_attribute(self, spec):
    if spec.name in self._attributes:
      return self._attributes[spec.name]
    if spec.name != 'dclass' and self._parent is not None:
      for default_el in self._root.default_chain(self.get_attribute('dclass'),
                                                 self):
        tag_default = default_el.section_child(self._tag)
        if tag_default is not None:
          value = tag_default.get_attribute(spec.name)
          if value is not None:
            return value
    if spec.default is None:
      return None
    if spec.kind is schema.AttrKind.ARRAY:
      return schema.coerce(self._tag, spec, spec.default)
    return spec.default

  def _resolve_reference(self, spec, value):
    if isinstance(value, Element):
      target = value
    else:
      target = self._root.find(spec.namespace, str(value))
      if target is None:
        raise errors.DanglingReferenceError(
            f"<{self._tag}> {spec.name}: no {spec.namespace} named "
            f"'{value}'")
    if target.namespace != spec.namespace:
      raise errors.SchemaViolationError(
          f'<{self._tag}> {spec.name}: expected a {spec.namespace} element, '
          f'got <{target.tag}>')
    return target

  # -- tree ----------------------------------------------------------------

  @property
  def children(self):
    return tuple(self._children)

  def add(self, tag, **attributes):
    """Appends a new child element and returns it.

    Attribute keyword names follow the schema, with the XML `class`
    attribute spelled `dclass`.
    """
    if tag not in self._spec.children:
      raise errors.SchemaViolationError(
          f'<{tag}> cannot be a child of <{self._tag}>')
    element = Element(tag, self._root, self)
    self._children.append(element)
    self._root.record_mutation(element, None)
    try:
      for name, value in attributes.items():
        element.set_attribute(name, value)
    except Exception:
      self._children.remove(element)
      raise
    return element

  def remove(self, child):
    self._children.remove(child)

  def section_child(self, tag):
    for child in self._children:
      if child.tag == tag and child.get_attribute('dclass') is None:
        return child
    return None

  def _get_or_create_section(self, tag):
    existing = self.section_child(tag)
    if existing is not None:
      return existing
    element = Element(tag, self._root, self)
    self._children.append(element)
    return element

  def iter_tree(self):
    """Yields this element and all descendants, without crossing into
    attached models."""
    yield self
    for child in self._children:
      yield from child.iter_tree()

  def iter_merged(self):
    """Like iter_tree but descends into attached models at their frames.

    A frame's own children (e.g. a freejoint) precede the attached model's
    content, matching serialization order.
    """
    yield self
    for child in self._children:
      yield from child.iter_merged()
    if self._attached_root is not None:
      yield from self._attached_root.worldbody.iter_merged_children()

  def iter_merged_children(self):
    for child in self._children:
      yield from child.iter_merged()

  # -- composition ---------------------------------------------------------

  def attach(self, child_root):
    """Attaches another model under this body or site.

    The child's world-body children are re-homed under a new frame body
    placed at this element's pose; all of the child's identifiers gain a
    unique `<prefix>/` namespace prefix. Returns the frame element, which
    accepts further children (e.g. a `freejoint`).
    """
    if self._tag not in ('body', 'site', 'worldbody'):
      raise errors.SchemaViolationError(
          f'cannot attach to <{self._tag}>; use a body or site')
    if not isinstance(child_root, RootElement):
      raise errors.SchemaViolationError('attach() expects a model root')
    return self._root.attach_at(self, child_root)

  def __repr__(self):
    name = self.get_attribute('name')
    label = f" '{name}'" if name else ''
    return f'<{self._tag}{label} at 0x{id(self):x}>'


class RootElement(Element):
  """The root of a model tree.

  Exposes the document sections as properties (`worldbody`, `asset`,
  `actuator`, `sensor`, `default`, `compiler`, `option`), plus search and
  composition operations over the model's namespaces.
  """

  def __init__(self, model='model'):
    super().__init__('mujoco', root=None, parent=None)
    object.__setattr__(self, '_root', self)
    object.__setattr__(self, '_attachments', [])   # (prefix, frame, child)
    object.__setattr__(self, '_attachment_by_prefix', {})
    object.__setattr__(self, '_attached_to', None)  # (parent_root, frame)
    object.__setattr__(self, '_debug', debugging.debug_mode_active())
    object.__setattr__(self, '_site_log',
                       debugging.SiteLog() if self._debug else None)
    object.__setattr__(self, '_synthesized_names', None)
    self.set_attribute('model', model)
    # Materialize the standard sections so documents serialize uniformly.
    _ = self.worldbody

  # -- model identity ------------------------------------------------------

  @property
  def model_name(self):
    return self.get_attribute('model')

  def outermost_root(self):
    root = self
    while root._attached_to is not None:
      root = root._attached_to[0]
    return root

  @property
  def parent_model(self):
    return self._attached_to[0] if self._attached_to else None

  @property
  def attachment_frame(self):
    return self._attached_to[1] if self._attached_to else None

  @property
  def attachments(self):
    return tuple(self._attachments)

  def prefix_path_from(self, root):
    """Concatenated attachment prefixes on the path from `root` to here."""
    if root is self:
      return ''
    parts = []
    current = self
    while current is not root:
      if current._attached_to is None:
        raise errors.Error(
            f"model '{self.model_name}' is not attached under "
            f"'{root.model_name}'")
      parent_root, frame = current._attached_to
      prefix = frame.get_attribute('name')  # '<prefix>/'
      parts.append(prefix)
      current = parent_root
    return ''.join(reversed(parts))

  # -- search --------------------------------------------------------------

  def find(self, namespace, identifier):
    """Returns the element with this full identifier, or None."""
    self._check_namespace(namespace)
    for element in self._iter_namespace(namespace, merged=False):
      name = element.get_attribute('name')
      if name is None:
        name = self.synthesized_name(element)
      if name == identifier:
        return element
    if '/' in identifier:
      prefix, _, rest = identifier.partition('/')
      attachment = self._attachment_by_prefix.get(prefix + '/')
      if attachment is not None:
        _, frame, child = attachment
        if rest == '':
          return frame if namespace == 'body' else None
        return child.find(namespace, rest)
    return None

  def find_all(self, namespace):
    """All elements of a namespace in document order.

    Called on a model that has attachments, the result includes the
    attached models' elements; called on an attached child, only the
    child's own elements are returned.
    """
    self._check_namespace(namespace)
    return list(self._iter_namespace(namespace, merged=True))

  def _check_namespace(self, namespace):
    if namespace not in schema.NAMESPACES:
      raise errors.SchemaViolationError(f"unknown namespace '{namespace}'")

  def _iter_namespace(self, namespace, merged):
    if namespace in ('actuator', 'sensor', 'material', 'texture'):
      sections = {'actuator': 'actuator', 'sensor': 'sensor',
                  'material': 'asset', 'texture': 'asset'}
      section = self.section_child(sections[namespace])
      if section is not None:
        for child in section.children:
          if child.namespace == namespace:
            yield child
      if merged:
        for _, _, child_root in self._attachments:
          yield from child_root._iter_namespace(namespace, merged=True)
      return
    iterator = (self.worldbody.iter_merged() if merged
                else self.worldbody.iter_tree())
    for element in iterator:
      if element.namespace == namespace and element.tag != 'worldbody':
        yield element

  def iter_elements(self):
    """All elements of this model (own tree only), document order."""
    yield from self.iter_tree()

  # -- naming --------------------------------------------------------------

  def check_name_free(self, element, name):
    ns = element.namespace
    if ns is None:
      return
    for other in self._iter_namespace(ns, merged=True):
      if other is not element and other.get_attribute('name') == name:
        raise errors.DuplicateNameError(
            f"duplicate {ns} name '{name}' in model '{self.model_name}'")

  def synthesized_name(self, element):
    """Deterministic name for an unnamed element (not serialized unless the
    element is referenced)."""
    names = self._synthesized_names
    if names is None or element not in names:
      names = {}
      taken = set()
      for ns in schema.NAMESPACES:
        for el in self._iter_namespace(ns, merged=False):
          name = el.get_attribute('name')
          if name is not None:
            taken.add((ns, name))
      counters = {}
      for ns in schema.NAMESPACES:
        for el in self._iter_namespace(ns, merged=False):
          if el.get_attribute('name') is None:
            k = counters.get(ns, 0)
            candidate = f'unnamed_{ns}_{k}'
            while (ns, candidate) in taken:
              k += 1
              candidate = f'unnamed_{ns}_{k}'
            counters[ns] = k + 1
            taken.add((ns, candidate))
            names[el] = candidate
      object.__setattr__(self, '_synthesized_names', names)
    return names[element]

  def invalidate_synthesized_names(self):
    object.__setattr__(self, '_synthesized_names', None)

  # -- defaults ------------------------------------------------------------

  def default_chain(self, dclass, element):
    """Default class elements to consult, most specific first."""
    root_default = self.section_child('default')
    if root_default is None:
      if dclass is not None:
        raise errors.DanglingReferenceError(
            f"<{element.tag}>: unknown default class '{dclass}'")
      return
    if dclass is None:
      yield root_default
      return
    chain = self._find_default_class(root_default, dclass, [])
    if chain is None:
      raise errors.DanglingReferenceError(
          f"<{element.tag}>: unknown default class '{dclass}'")
    yield from chain

  def _find_default_class(self, node, dclass, ancestors):
    path = [node] + ancestors
    if node.get_attribute('dclass') == dclass:
      return path
    for child in node.children:
      if child.tag == 'default':
        found = self._find_default_class(child, dclass, path)
        if found is not None:
          return found
    return None

  # -- composition ---------------------------------------------------------

  def attach_at(self, host, child_root):
    if child_root._attached_to is not None:
      raise errors.Error(
          f"model '{child_root.model_name}' is already attached")
    ancestor = self
    while ancestor is not None:
      if ancestor is child_root:
        raise errors.Error('cyclic attachment')
      ancestor = ancestor.parent_model
    prefix = self._free_prefix(child_root.model_name or 'model')
    if host.tag == 'site':
      frame_parent = host.parent
      pose = {'pos': np.array(host.pos, dtype=float)}
      quat = _orientation_quat(host)
      if quat is not None:
        pose['quat'] = quat
    else:
      frame_parent = host
      pose = {}
    frame = Element('body', self, frame_parent)
    frame_parent._children.append(frame)
    frame._attributes['name'] = prefix  # ends with '/': bypasses raw checks
    for key, value in pose.items():
      frame._attributes[key] = value
    frame._attached_root = child_root
    self._attachments.append((prefix, frame, child_root))
    self._attachment_by_prefix[prefix] = (prefix, frame, child_root)
    object.__setattr__(child_root, '_attached_to', (self, frame))
    self.record_mutation(frame, None)
    self.invalidate_synthesized_names()
    return frame

  def _free_prefix(self, base):
    base = base.replace('/', '_')
    taken = set(self._attachment_by_prefix)
    candidate = base + '/'
    i = 0
    while candidate in taken:
      i += 1
      candidate = f'{base}_{i}/'
    return candidate

  # -- provenance ----------------------------------------------------------

  @property
  def debug_mode(self):
    return self._debug

  def record_mutation(self, element, attribute):
    self.invalidate_synthesized_names()
    if self._site_log is not None:
      self._site_log.record(element, attribute)

  def provenance(self, element, attribute=None):
    """The (file, line) that last modified `element` (or its attribute).

    Raises ProvenanceUnavailableError unless debug mode was active when
    this model root was constructed.
    """
    if self._site_log is None:
      raise errors.ProvenanceUnavailableError(
          'mutation tracking is off; re-run with CTRLFORGE_DEBUG=1 (or call '
          'mjcf.set_debug_mode(True)) before constructing the model')
    return self._site_log.lookup(element, attribute)

  def dump_provenance(self, directory):
    if self._site_log is None:
      raise errors.ProvenanceUnavailableError(
          'mutation tracking is off; re-run with CTRLFORGE_DEBUG=1 to '
          'enable provenance dumps')
    return self._site_log.dump(directory, self)

  # -- serialization (implemented in serializer.py) -------------------------

  def to_xml_string(self):
    from ctrlforge.mjcf import serializer
    return serializer.to_xml_string(self)

  def __repr__(self):
    return f"<model root '{self.model_name}' at 0x{id(self):x}>"


def _orientation_quat(element):
  """Explicit orientation of an element as a quaternion, or None."""
  from ctrlforge.engine import rotations
  euler = element.get_attribute('euler')
  quat = element.get_attribute('quat')
  if euler is not None and quat is not None:
    raise errors.SchemaViolationError(
        f'<{element.tag}>: specify at most one of euler/quat')
  if euler is not None:
    degrees = element.root.compiler.angle == 'degree'
    return rotations.euler_to_quat(euler, degrees=degrees)
  if quat is not None:
    return rotations.quat_normalize(np.asarray(quat, dtype=float))
  return None


def _orientation_quat_from(euler_value, degrees):
  from ctrlforge.engine import rotations
  return rotations.euler_to_quat(euler_value, degrees=degrees)
