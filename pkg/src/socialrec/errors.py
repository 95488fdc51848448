"""Exception hierarchy shared by every module."""


class SocialRecError(Exception):
    """Base class for all errors raised by the package."""


class ParseError(SocialRecError, ValueError):
    """A text record could not be parsed."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class DomainError(SocialRecError, ValueError):
    """A value lies outside its permitted domain."""


class DuplicateError(SocialRecError, ValueError):
    pass


class NormalizationError(SocialRecError, ValueError):
    """Influence weights do not sum to one."""


class ArgumentError(SocialRecError, ValueError):
    pass


class UndefinedMeanError(SocialRecError, ValueError):
    pass


class PredictionError(SocialRecError, ValueError):
    pass


class ConfigurationError(SocialRecError, ValueError):
    pass


class AssemblyError(SocialRecError, ValueError):
    """An initial group opinion is missing for some (user, item)."""

    def __init__(self, user, item):
        self.user = user
        self.item = item
        super().__init__(f"no initial opinion for user {user!r} on item {item!r}")


class NumericalError(SocialRecError, ArithmeticError):
    pass


class SingularityError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass
