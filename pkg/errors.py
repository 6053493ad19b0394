"""Exceptions raised by the framework."""


class FrameworkError(Exception):
    """Base class for every error the framework reports."""


class SpawnError(FrameworkError):
    pass


class RegistrationError(FrameworkError):
    """Window class registration or unregistration failed."""


class WindowError(FrameworkError):
    """Operation on a destroyed or unknown window."""


class TimerError(FrameworkError):
    pass


class ClockError(FrameworkError):
    """The virtual clock cannot move backwards."""


class PumpError(FrameworkError):
    pass


class MessageError(FrameworkError):
    """A message only the system may generate was posted or sent."""


class ResourceError(FrameworkError):
    pass


class DCError(ResourceError):
    """Device context misuse: dead handle, wrong thread, nothing selected."""


class MenuError(ResourceError):
    pass


class ScriptError(FrameworkError):
    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
