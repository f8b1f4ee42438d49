"""Exception hierarchy shared by all vakya modules."""

from __future__ import annotations


class VakyaError(Exception):
    """Base class for all errors raised by this package."""


# --- script handling ---

class UnknownScriptError(VakyaError):
    pass


class MalformedTextError(VakyaError):
    """A script-internal combining character appeared without a valid base.

    ``offset`` is the character index in the NFC-normalized input.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


# --- corpora / chunks ---

class EmptyCorpusError(VakyaError):
    pass


class DuplicateChunkIdError(VakyaError):
    pass


class UnlemmatizedChunkError(VakyaError):
    def __init__(self, chunk_id: str):
        super().__init__(f"chunk {chunk_id!r} has no lemmatized text")
        self.chunk_id = chunk_id


class UnknownChunkError(VakyaError):
    pass


# --- lemmatization ---

class LexiconMissingError(VakyaError):
    pass


class ExternalLemmatizerUnavailableError(VakyaError):
    pass


# --- embeddings ---

class DimMismatchError(VakyaError):
    def __init__(self, line_no: int, expected: int, got: int):
        super().__init__(
            f"embedding line {line_no}: expected {expected} values, got {got}"
        )
        self.line_no = line_no


class EmbeddingParseError(VakyaError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"embedding line {line_no}: {reason}")
        self.line_no = line_no


# --- metrics ---

class LengthMismatchError(VakyaError):
    pass


class SentenceCountMismatchError(VakyaError):
    pass


class TooFewItemsError(VakyaError):
    pass


# --- prompts ---

class UnknownTemplateError(VakyaError):
    pass


class MissingPlaceholderError(VakyaError):
    def __init__(self, name: str):
        super().__init__(f"binding is missing placeholder {name!r}")
        self.name = name


class EmptyTagsetError(VakyaError):
    pass


# --- LLM client ---

class TransportError(VakyaError):
    pass


class RateLimitedError(VakyaError):
    pass


class CacheMissError(VakyaError):
    pass


class ProviderError(VakyaError):
    def __init__(self, status: int, body_excerpt: str):
        super().__init__(f"provider returned status {status}: {body_excerpt}")
        self.status = status
        self.body_excerpt = body_excerpt


class MockScriptExhaustedError(VakyaError):
    pass


# --- knowledge graph ---

class KgParseError(VakyaError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"KG line {line_no}: {reason}")
        self.line_no = line_no


class DanglingEdgeError(VakyaError):
    pass


# --- datasets / config ---

class SchemaError(VakyaError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class ConfigError(VakyaError):
    pass
