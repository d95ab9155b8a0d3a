"""Moore machines as recursive string functions.

Finite machines, general products defined by a simultaneous recursion,
minimization, transition monoids and a small JSON spec format.
"""

from importlib import resources

from .core import (
    Alphabet,
    GeneratorMachine,
    Machine,
    StringFunction,
    Symbol,
    constant_machine,
    delta_star,
    remap_output,
    representing_function,
    show_word,
    word,
)
from .errors import (
    RmooreError,
    UnknownSymbolError,
    UnknownStateError,
    AlphabetMismatchError,
    InfiniteMachineError,
    BudgetExceededError,
    OpaqueMapError,
    MonoidSizeError,
    BadParameterError,
    SpecError,
    UnresolvedNameError,
)
from .minimize import Equivalence, MinimizedMachine, equivalent, minimize, reachable
from .monoid import classify, congruent, transition_monoid
from .product import (
    ProductDef,
    binary_encode,
    check_theorem1,
    expand_product,
    initial_state,
    is_cascade,
    product_function,
    recursion_eval,
    recursion_machine,
    step,
)

__version__ = "0.1.0"


def fixture_path(name: str):
    """Path of a shipped fixture, e.g. ``fixture_path("stack.json")``."""
    return resources.files(__name__) / "fixtures" / name


__all__ = [
    "Alphabet", "GeneratorMachine", "Machine", "StringFunction", "Symbol", "constant_machine",
    "delta_star", "remap_output", "representing_function", "show_word", "word",
    "Equivalence", "MinimizedMachine", "equivalent", "minimize", "reachable",
    "classify", "congruent", "transition_monoid",
    "ProductDef", "binary_encode", "check_theorem1", "expand_product", "initial_state", "is_cascade",
    "product_function", "recursion_eval", "recursion_machine", "step", "fixture_path",
    "RmooreError", "UnknownSymbolError", "UnknownStateError", "AlphabetMismatchError", "InfiniteMachineError", "BudgetExceededError",
    "OpaqueMapError", "MonoidSizeError", "BadParameterError", "SpecError", "UnresolvedNameError",
]
