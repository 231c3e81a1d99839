from .chat import BackendError, BackendRequest, ChatTurn, HttpChatBackend, ScriptedBackend
from .embeddings import (
    VOCAB,
    EmbeddingError,
    EmbeddingProvider,
    HttpEmbeddingProvider,
    SyntheticEmbeddingProvider,
    plant_token,
)

__all__ = [
    "VOCAB",
    "BackendError",
    "BackendRequest",
    "ChatTurn",
    "EmbeddingError",
    "EmbeddingProvider",
    "HttpChatBackend",
    "HttpEmbeddingProvider",
    "ScriptedBackend",
    "SyntheticEmbeddingProvider",
    "plant_token",
]
