from .client import (
    CachingChatClient,
    ChatClient,
    ChatRequest,
    ChatResponse,
    EchoAnswerMock,
    HttpChatClient,
    MockChatClient,
    cache_key,
    load_mock,
)
from .parsers import (
    BinaryResult,
    ScoredListResult,
    TaggedDictResult,
    parse_binary,
    parse_scored_list,
    parse_tagged_dict,
)

__all__ = [
    "CachingChatClient",
    "ChatClient",
    "ChatRequest",
    "ChatResponse",
    "EchoAnswerMock",
    "HttpChatClient",
    "MockChatClient",
    "cache_key",
    "load_mock",
    "BinaryResult",
    "ScoredListResult",
    "TaggedDictResult",
    "parse_binary",
    "parse_scored_list",
    "parse_tagged_dict",
]
