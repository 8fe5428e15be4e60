class ExporterError(Exception):
    """Base class for exporter failures."""


class AudioDecodeError(ExporterError):
    """The audio file could not be read or is empty."""


class ModelLoadError(ExporterError):
    """A required pretrained network could not be obtained."""


class UnknownKind(ExporterError):
    """Unrecognized feature kind."""
