"""Object model for the XML articulated-body description language."""

from ctrlforge.mjcf.debugging import set_debug_mode
from ctrlforge.mjcf.element import Element
from ctrlforge.mjcf.element import RootElement
from ctrlforge.mjcf.parser import parse_file
from ctrlforge.mjcf.parser import parse_string
from ctrlforge.mjcf.schema import GEOM_TYPES
from ctrlforge.mjcf.schema import NAMESPACES
from ctrlforge.mjcf.serializer import to_xml_string


def structurally_equal(a: RootElement, b: RootElement) -> bool:
  """Structural equality of two models, judged on their canonical form."""
  return to_xml_string(a) == to_xml_string(b)
