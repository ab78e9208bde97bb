"""Exception types shared across the package."""


class TreeGroupError(Exception):
    """Base class for every error raised by treegerms."""


class OrderExceedsCap(TreeGroupError):
    def __init__(self, cap):
        super().__init__(f"group closure exceeded the cap of {cap} elements")
        self.cap = cap


class NotTransitive(TreeGroupError):
    pass


class DegreeTooLarge(TreeGroupError):
    def __init__(self, degree, max_degree):
        super().__init__(
            f"degree {degree} exceeds the brute-force limit {max_degree} "
            f"(raise it explicitly to search Sym({degree}))"
        )
        self.degree = degree
        self.max_degree = max_degree


class CycleSyntaxError(TreeGroupError, ValueError):
    """Malformed cycle notation; ``position`` is a 0-based character offset."""

    def __init__(self, message, text, position):
        super().__init__(f"{message} at offset {position} in {text!r}")
        self.message = message
        self.text = text
        self.position = position


class InvalidAddress(TreeGroupError, ValueError):
    pass


class ProfileMismatch(TreeGroupError, ValueError):
    pass


class ChildNotFixed(TreeGroupError, ValueError):
    pass


class TowerOverflow(TreeGroupError, OverflowError):
    pass


class RecipeDegenerate(TreeGroupError):
    pass


class NotPrefixFree(TreeGroupError, ValueError):
    def __init__(self, prefix, leaf):
        super().__init__(f"{prefix} is a prefix of {leaf}")
        self.witness = (prefix, leaf)


class NotComplete(TreeGroupError, ValueError):
    def __init__(self, kraft_sum):
        super().__init__(f"Kraft sum is {kraft_sum}, expected 1")
        self.kraft_sum = kraft_sum


class LeafAbsent(TreeGroupError, KeyError):
    pass


class IncompatibleParameters(TreeGroupError, ValueError):
    pass


class LevelTooShallow(TreeGroupError, ValueError):
    pass


class NotARefinement(TreeGroupError, ValueError):
    pass


class CatalogError(TreeGroupError, ValueError):
    """A catalog file or entry that cannot be read; line/column are 1-based."""

    def __init__(self, message, line=None, column=None):
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)
        self.message = message
        self.line = line
        self.column = column
