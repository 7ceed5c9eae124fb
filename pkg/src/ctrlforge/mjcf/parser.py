"""Parsing of model documents into element trees."""

import xml.parsers.expat

from ctrlforge import errors
from ctrlforge.mjcf import element as element_lib
from ctrlforge.mjcf import schema


class _RawNode:

  __slots__ = ('tag', 'attrs', 'children', 'line', 'column')

  def __init__(self, tag, attrs, line, column):
    self.tag = tag
    self.attrs = attrs
    self.children = []
    self.line = line
    self.column = column


def _build_raw_tree(text):
  parser = xml.parsers.expat.ParserCreate()
  parser.ordered_attributes = True
  root = None
  stack = []

  def start(tag, attr_list):
    nonlocal root
    attrs = list(zip(attr_list[0::2], attr_list[1::2]))
    node = _RawNode(tag, attrs, parser.CurrentLineNumber,
                    parser.CurrentColumnNumber + 1)
    if stack:
      stack[-1].children.append(node)
    else:
      root = node
    stack.append(node)

  def end(tag):
    del tag
    stack.pop()

  parser.StartElementHandler = start
  parser.EndElementHandler = end
  try:
    parser.Parse(text, True)
  except xml.parsers.expat.ExpatError as e:
    raise errors.ParseError(
        f'XML syntax error at line {e.lineno}, column {e.offset + 1}: '
        f'{xml.parsers.expat.errors.messages[e.code]}') from None
  return root


def parse_string(xml_text: str):
  """Parses a model document, returning its root.

  Raises ParseError on malformed XML or schema violations (with the
  document location), and DanglingReferenceError when a reference
  attribute names a missing element.
  """
  raw = _build_raw_tree(xml_text)
  if raw is None or raw.tag != 'mujoco':
    raise errors.ParseError("document root must be <mujoco>")
  model_name = dict(raw.attrs).get('model', 'model')
  root = element_lib.RootElement(model=model_name)
  pending_refs = []
  for child in raw.children:
    _parse_section(root, child, pending_refs)
  for el, attr, value, loc in pending_refs:
    target = root.find(attr.namespace, value)
    if target is None:
      raise errors.DanglingReferenceError(
          f"{loc}: <{el.tag}> {attr.name}: no {attr.namespace} named "
          f"'{value}'")
    el._attributes[attr.name] = target
  _validate_default_classes(root)
  return root


def parse_file(path):
  with open(path, 'r', encoding='utf-8') as f:
    return parse_string(f.read())


def _loc(node):
  return f'line {node.line}, column {node.column}'


def _parse_section(root, node, pending_refs):
  if node.tag not in schema.ROOT_SECTIONS:
    raise errors.ParseError(
        f'{_loc(node)}: <{node.tag}> is not a valid section of <mujoco>')
  spec = schema.tag_spec(node.tag)
  if spec.singleton or node.tag == 'default':
    existing = root.section_child(node.tag)
    if existing is not None and (existing.children
                                 or existing.explicit_attributes()):
      raise errors.ParseError(
          f'{_loc(node)}: duplicate <{node.tag}> section')
  section = getattr(root, node.tag)
  _apply_attrs(section, node, pending_refs)
  for child in node.children:
    _parse_element(section, child, pending_refs)


def _parse_element(parent, node, pending_refs):
  parent_spec = schema.tag_spec(parent.tag)
  if node.tag not in parent_spec.children:
    raise errors.ParseError(
        f'{_loc(node)}: <{node.tag}> cannot be a child of <{parent.tag}>')
  el = element_lib.Element(node.tag, parent.root, parent)
  parent._children.append(el)
  parent.root.record_mutation(el, None)
  _apply_attrs(el, node, pending_refs)
  for child in node.children:
    _parse_element(el, child, pending_refs)
  return el


def _apply_attrs(el, node, pending_refs):
  for xml_name, value in node.attrs:
    if el.tag == 'mujoco' and xml_name == 'model':
      continue
    try:
      attr = schema.attr_spec_by_xml_name(el.tag, xml_name)
    except schema.SchemaError as e:
      raise errors.ParseError(f'{_loc(node)}: {e}') from None
    if attr.kind is schema.AttrKind.REFERENCE:
      pending_refs.append((el, attr, value, _loc(node)))
      continue
    if attr.name == 'name' or (el.tag == 'default' and attr.name == 'dclass'):
      # Parsed documents may be flattened compositions whose identifiers
      # contain the '/' separator; accept them verbatim.
      if not value:
        raise errors.ParseError(f'{_loc(node)}: empty {xml_name} attribute')
      if attr.name == 'name':
        try:
          el.root.check_name_free(el, value)
        except errors.DuplicateNameError as e:
          raise errors.ParseError(f'{_loc(node)}: {e}') from None
      el._attributes[attr.name] = value
      el.root.record_mutation(el, attr.name)
      continue
    try:
      coerced = schema.coerce(el.tag, attr, value)
    except schema.SchemaError as e:
      raise errors.ParseError(f'{_loc(node)}: {e}') from None
    el._attributes[attr.name] = coerced
    el.root.record_mutation(el, attr.name)


def _validate_default_classes(root):
  for el in root.iter_elements():
    dclass = el.get_attribute('dclass')
    if dclass is not None and el.tag != 'default':
      list(root.default_chain(dclass, el))  # raises if the class is unknown
