"""Exception hierarchy shared by every subpackage."""


class LlmExplorerError(Exception):
    """Base class for all package errors."""


# core
class AllZero(LlmExplorerError, ValueError):
    pass


class NegativeEntry(LlmExplorerError, ValueError):
    pass


class InvalidDistribution(LlmExplorerError, ValueError):
    pass


# envs
class InvalidAction(LlmExplorerError, ValueError):
    pass


class Unsupported(LlmExplorerError):
    pass


# neural / agents
class ShapeMismatch(LlmExplorerError, ValueError):
    pass


class ArityMismatch(LlmExplorerError, ValueError):
    pass


class DimensionMismatch(LlmExplorerError, ValueError):
    pass


class EmptyBuffer(LlmExplorerError):
    pass


# explorer parsing
class ParseError(LlmExplorerError, ValueError):
    """Base for every typed parser outcome other than success."""


class ParseFailure(ParseError):
    pass


class NegativeProbability(ParseError):
    pass


class SumOutOfRange(ParseError):
    pass


class KeyOutOfRange(ParseError):
    pass


class NonFiniteValue(ParseError):
    pass


class NoEpisodes(LlmExplorerError):
    pass


class BothFailed(LlmExplorerError):
    pass


class GenerationFailure(LlmExplorerError):
    pass


# llm client
class TransportError(LlmExplorerError):
    pass


class MissingCredential(LlmExplorerError):
    pass


class ReplayMiss(LlmExplorerError, KeyError):
    pass


class IoFailure(LlmExplorerError, OSError):
    pass


# harness
class DegenerateBaseline(LlmExplorerError, ZeroDivisionError):
    pass


class EmptyInput(LlmExplorerError, ValueError):
    pass


class ConfigError(LlmExplorerError, ValueError):
    pass
