"""Exception hierarchy shared by all modules."""


class TeamError(Exception):
    """Base class for every error raised by this package."""


# --- team files / model construction ---------------------------------------

class SchemaError(TeamError):
    """Team document is malformed or violates the file schema."""


class CyclicGraph(TeamError):
    """The causal graph contains a directed cycle."""


class ConditionBViolation(TeamError):
    """Two rows agree on the parents of a variable but disagree on it."""


class ConditionCViolation(TeamError):
    """A row contradicts an entry of a structural function table."""


class RangeViolation(TeamError):
    """A value lies outside the declared range of its variable."""


class UnknownVariable(TeamError):
    """A variable name is not part of the team's domain / graph."""


# --- formulas ----------------------------------------------------------------

class FormulaSyntaxError(TeamError):
    """Formula text does not conform to the grammar."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class NotClassicalAntecedent(FormulaSyntaxError):
    """A selective-implication antecedent is not a classical formula."""


# Parser-facing alias used by the syntax module.
AntecedentNotClassical = NotClassicalAntecedent


class AntecedentNotConjunctionOfEq(FormulaSyntaxError):
    """A counterfactual antecedent is not a conjunction of equality atoms."""


class NotInCO(TeamError):
    """Operation requires a causal-observational formula."""


# --- evaluation --------------------------------------------------------------

class FormalTermEncountered(TeamError):
    """Standard satisfaction queried on formal-term entries; use the
    falsifiability or admissibility relation instead."""


class TeamTooLargeForSplit(TeamError):
    """Disjunction cover search exceeds the configured row cap."""


class UnsupportedConnective(TeamError):
    """Connective not supported by the requested satisfaction relation."""


class NotSupportedShape(TeamError):
    """Admissibility is defined only for atoms and classical DNF formulas."""


class InconsistentSpec(TeamError):
    """Intervention binds one variable to two different values."""


# --- probability -------------------------------------------------------------

class EmptyTeam(TeamError):
    """Probabilities are undefined on the empty team."""


class ZeroCondition(TeamError):
    """Conditioning event has probability zero."""


class NotParametric(TeamError):
    """Operation requires total structural-function tables."""


class DomainTooLarge(TeamError):
    """Exhaustive check refused: variable domain exceeds the cap."""


# --- searches ----------------------------------------------------------------

class SearchSpaceTooLarge(TeamError):
    """Witness search refused: candidate space exceeds the cap."""


class UnknownLaw(TeamError):
    """Law identifier is not registered in the harness."""
