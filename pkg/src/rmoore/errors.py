"""Exception hierarchy shared by every rmoore module."""


class RmooreError(Exception):
    """Base class for all library errors."""


class UnknownSymbolError(RmooreError, KeyError):
    def __init__(self, symbol, alphabet=None):
        self.symbol = symbol
        msg = f"symbol {symbol!s} is not in the alphabet"
        if alphabet is not None:
            msg += f" {{{', '.join(str(s) for s in alphabet)}}}"
        super().__init__(msg)

    def __str__(self):
        return self.args[0]


class UnknownStateError(RmooreError, IndexError):
    pass


class AlphabetMismatchError(RmooreError, ValueError):
    """Raised when a connection map emits a symbol outside a factor's alphabet,
    or when two machines compared for equivalence have different alphabets."""


class InfiniteMachineError(RmooreError, TypeError):
    """An operation that needs a finite table was handed a generator-backed machine."""


class BudgetExceededError(RmooreError):
    def __init__(self, message, checked=0):
        super().__init__(message)
        self.checked = checked


class OpaqueMapError(RmooreError, TypeError):
    """Dependency analysis was requested on a connection map given as plain code."""


class MonoidSizeError(RmooreError):
    def __init__(self, cap):
        super().__init__(f"monoid exceeds the size cap of {cap} elements")
        self.cap = cap


class BadParameterError(RmooreError, ValueError):
    pass


class SpecError(RmooreError, ValueError):
    """Parse or resolution failure in a spec document.

    ``errors`` holds ``(location, message)`` pairs; location is ``"line:col"``
    for syntax errors and a dotted document path for semantic ones.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [("", errors)]
        self.errors = list(errors)
        super().__init__("; ".join(f"{loc}: {msg}" if loc else msg for loc, msg in self.errors))


class UnresolvedNameError(SpecError):
    def __init__(self, name, location=""):
        self.name = name
        super().__init__([(location, f"unresolved name {name!r}")])
