"""Exception hierarchy for pagetime."""


class PagetimeError(Exception):
    """Base class for every error raised by this package."""


class ParseError(PagetimeError, ValueError):
    """Input document could not be parsed.

    ``offset`` is a byte offset into a JSON document, ``row`` a 1-based
    line number in a CSV file. Either may be None.
    """

    def __init__(self, message, offset=None, row=None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        if row is not None:
            message = f"{message} (row {row})"
        super().__init__(message)
        self.offset = offset
        self.row = row


class EmptyManifest(PagetimeError, ValueError):
    pass


class DomainError(PagetimeError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class SchemaError(PagetimeError, KeyError):
    def __init__(self, field, message=None):
        super().__init__(field)
        self.field = field
        self.message = message or f"missing or unknown field: {field}"

    def __str__(self):
        return self.message


class ValidationError(PagetimeError, ValueError):
    pass


class DegenerateFit(PagetimeError, ValueError):
    """Predictor has zero variance, so the regression line is undefined."""

    def __init__(self, parameter="fit"):
        super().__init__(f"degenerate predictor for {parameter}")
        self.parameter = parameter


class EmptyColumn(PagetimeError, ValueError):
    def __init__(self, column):
        super().__init__(f"no values present for {column}")
        self.column = column


class IncompleteManifest(PagetimeError, ValueError):
    def __init__(self, doc_order):
        super().__init__(f"component {doc_order} has no measured fb/cd time")
        self.doc_order = doc_order


class ProfileIncomplete(PagetimeError, ValueError):
    def __init__(self, parameter):
        super().__init__(f"profile has no model for {parameter}")
        self.parameter = parameter
