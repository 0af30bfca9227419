"""Exception types shared across the package."""


class WordLogicError(Exception):
    """Base class for all package errors."""


class FormulaSyntaxError(WordLogicError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class SortError(WordLogicError):
    """A first-order variable used where a second-order one is required, or vice versa."""


class UnboundVariableError(WordLogicError):
    def __init__(self, names):
        super().__init__(f"free variables in sentence: {', '.join(sorted(names))}")
        self.names = frozenset(names)


class CaptureError(WordLogicError):
    """A substitution target would be captured by a binder."""


class BadWordError(WordLogicError):
    """Input text is not a word over {l, r}."""


class LevelTooLargeError(WordLogicError):
    """Requested cumulative-hierarchy level is beyond what can be materialized."""


class UnbalancedBracesError(WordLogicError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class EvalBudgetExceededError(WordLogicError):
    """The evaluator passed its node-evaluation budget."""


class StateBudgetExceededError(WordLogicError):
    """An automaton construction step passed the state-count budget."""


class TrackContextError(WordLogicError):
    """Automaton operation applied with an incompatible track context."""


class ArityMismatchError(WordLogicError):
    """Interpretation arities do not match an automaton's track context."""


class DomainError(WordLogicError):
    """Numeric argument outside the function's domain."""
