"""Exception types raised by the rule engine."""


class EngineError(Exception):
    """Base class for rule-engine failures."""


class ParseError(EngineError):
    """Malformed rule text.  Carries the 1-based line and column."""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SafetyError(EngineError):
    """A variable occurs outside every positive body atom of its rule."""

    def __init__(self, variable: str, rule_text: str) -> None:
        super().__init__(f"unsafe variable {variable} in: {rule_text}")
        self.variable = variable
        self.rule_text = rule_text


class StratificationError(EngineError):
    """Negation cycles through the predicate dependency graph."""


class UniverseError(EngineError):
    """A referenced sort or named constant has no grounding."""


class TooManyChoices(EngineError):
    """Ground choice elements exceed the exhaustive-search budget."""


class Unsatisfiable(EngineError):
    """No candidate choice subset yields an admissible answer set."""
