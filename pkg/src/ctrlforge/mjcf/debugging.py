"""Mutation-site tracking for model debugging.

When debug mode is on, every element creation and attribute write records
the user code location that performed it, so compile errors on
programmatically assembled models can point back at the responsible line.
Tracking walks the Python stack on every mutation, which is expensive, so
it is off by default and latched per model at construction time.
"""

import os
import traceback

_DEBUG_ENV_VAR = 'CTRLFORGE_DEBUG'
_DUMP_DIR_ENV_VAR = 'CTRLFORGE_DEBUG_DUMP_DIR'

_debug_mode = None  # tri-state: None = follow the environment variable


def set_debug_mode(enabled):
  """Forces debug mode on or off; pass None to follow CTRLFORGE_DEBUG."""
  global _debug_mode
  _debug_mode = enabled


def debug_mode_active() -> bool:
  if _debug_mode is not None:
    return bool(_debug_mode)
  return os.environ.get(_DEBUG_ENV_VAR, '') not in ('', '0', 'false')


def dump_dir() -> str:
  return os.environ.get(_DUMP_DIR_ENV_VAR, '')


def current_call_site():
  """Returns (filename, line) of the innermost frame outside this package."""
  package_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
  for frame in reversed(traceback.extract_stack()):
    filename = os.path.abspath(frame.filename)
    if not filename.startswith(package_dir):
      return frame.filename, frame.lineno
  return '<unknown>', 0


class SiteLog:
  """Per-model log of mutation sites, keyed by (element id, attribute)."""

  def __init__(self):
    self._sites = {}

  def record(self, element, attribute=None):
    self._sites[(id(element), attribute)] = current_call_site()

  def lookup(self, element, attribute=None):
    return self._sites.get((id(element), attribute))

  def dump(self, directory, root):
    """Writes one provenance log file per element to `directory`."""
    os.makedirs(directory, exist_ok=True)
    index_path = os.path.join(directory, 'provenance_index.txt')
    with open(index_path, 'w', encoding='utf-8') as index:
      for i, element in enumerate(root.iter_elements()):
        lines = []
        created = self.lookup(element, None)
        if created:
          lines.append(f'created: {created[0]}:{created[1]}')
        for attr in sorted(element.explicit_attributes()):
          site = self.lookup(element, attr)
          if site:
            lines.append(f'{attr}: {site[0]}:{site[1]}')
        filename = f'element_{i:05d}_{element.tag}.log'
        with open(os.path.join(directory, filename), 'w',
                  encoding='utf-8') as f:
          f.write('\n'.join(lines) + '\n')
        ident = element.get_attribute('name') or ''
        index.write(f'{filename}\t<{element.tag}>\t{ident}\n')
    return index_path
