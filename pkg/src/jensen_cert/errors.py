"""Exception types shared across the package."""


class JensenCertError(Exception):
    pass


class ParseError(JensenCertError):
    """Formula text could not be parsed. ``offset`` is a byte offset into the input."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class DomainError(JensenCertError):
    """A function was evaluated outside of its domain.

    ``offset`` locates the offending subexpression in the source formula when the
    function came from parsed text; ``point`` is filled in by callers that know it.
    """

    def __init__(self, message, offset=None, expr=None, point=None):
        self.base_message = message
        self.offset = offset
        self.expr = expr
        self.point = point
        super().__init__(self._render())

    def _render(self):
        msg = self.base_message
        if self.expr is not None:
            msg += f" in '{self.expr}'"
        if self.offset is not None:
            msg += f" (at offset {self.offset})"
        if self.point is not None:
            msg += f" at point {tuple(float(v) for v in self.point)}"
        return msg

    def at_point(self, point):
        err = DomainError(self.base_message, self.offset, self.expr, point)
        return err


class NumericalError(JensenCertError):
    """An iterative numerical method failed to converge."""
