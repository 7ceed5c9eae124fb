"""Exception types shared across the package."""


class Error(Exception):
  """Base class for all package errors."""


class SchemaViolationError(Error):
  """A model element or attribute falls outside the supported schema."""


class ParseError(Error):
  """Malformed XML or a schema violation at a given document location."""


class DanglingReferenceError(Error):
  """A reference attribute names an element that does not exist."""


class DuplicateNameError(Error):
  """Two elements share a full identifier within a namespace."""


class CompileError(Error):
  """A structurally valid model cannot be compiled for simulation."""


class DivergenceError(Error):
  """Simulation produced a non-finite state."""


class ProvenanceUnavailableError(Error):
  """Mutation tracking was requested but debug mode is off."""


class UnknownNameError(Error, KeyError):
  """A name lookup failed against a compiled model's name tables."""

  def __str__(self):
    # KeyError.__str__ repr()s the message; keep it plain.
    return self.args[0] if self.args else ''


class SpecViolationError(Error):
  """A value does not conform to its array spec."""
