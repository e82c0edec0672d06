"""Exception hierarchy shared by every stage of the advisor."""


class AdvisorError(Exception):
    """Base class for all advisor failures.

    ``statement`` is set to the workload ordinal when the failure comes from
    one statement of a workload file.
    """

    statement = None

    def __str__(self):
        base = super().__str__()
        if self.statement is not None:
            return f"statement {self.statement}: {base}"
        return base


class ParseError(AdvisorError):
    pass


class ValidationError(AdvisorError):
    pass


class UnknownAttribute(AdvisorError):
    pass


class UnknownTable(AdvisorError):
    pass


class QuerySyntaxError(AdvisorError):
    """Malformed SQL. ``offset`` is the byte offset of the offending token."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class UnsupportedFeature(AdvisorError):
    def __init__(self, feature, detail=""):
        msg = feature
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.feature = feature


class EmptyWorkload(AdvisorError):
    pass


class InvalidMinsup(AdvisorError):
    pass


class InvalidThreshold(AdvisorError):
    pass


class LengthMismatch(AdvisorError):
    pass


class EmptyCluster(AdvisorError):
    pass


class UnsizedStructure(AdvisorError):
    pass


class InvalidBudget(AdvisorError):
    pass


class InvalidAlpha(AdvisorError):
    pass


class UnknownStructureId(AdvisorError):
    pass
