"""Clients for the three external model capabilities.

Embedding, translation (both directions), and grounded generation each come
in two flavours selected purely by configuration: a remote JSON-over-HTTP
backend, and a deterministic built-in stand-in so the entire system runs and
tests offline. Swapping remote for mock changes no pipeline code path.

Wire protocol (all bodies UTF-8 JSON, non-2xx responses raise TransportError):

- ``POST {url}/embed``     ``{"texts": [str...]}`` -> ``{"vectors": [[float...]...], "dim": int}``
- ``POST {url}/translate`` ``{"text": str, "source": "bn"|"en", "target": "en"|"bn"}`` -> ``{"text": str}``
- ``POST {url}/generate``  ``{"prompt": str, "max_tokens": int, "temperature": float}`` -> ``{"text": str}``
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import requests

from .errors import TransportError
from .textutil import is_word_char, split_sentences, tokenize

# Exact sentinel the generator must emit when the retrieved context does not
# contain the answer. Detection downstream is exact string containment.
UNAVAILABLE_MARKER = "INFORMATION_NOT_AVAILABLE"

DEFAULT_EMBEDDING_DIM = 384
MOCK_EMBEDDING_DIM = 64

Direction = Literal["bn_to_en", "en_to_bn"]

# Minimal English stopword list for the extractive mock generator; a token
# outside this set counts as "content" when scoring sentence overlap.
_STOPWORDS = frozenset(
    "a an and are as at be by for from has have how i in is it of on or "
    "should that the this to was what when where which who will with you".split()
)


@dataclass(frozen=True)
class BackendEndpoint:
    """Identity and resilience settings of one remote backend."""

    url: str
    timeout_ms: int = 10_000
    retries: int = 0

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError(f"timeout_ms must be positive, got {self.timeout_ms}")
        if self.retries < 0:
            raise ValueError(f"retries must be >= 0, got {self.retries}")


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    max_tokens: int = 512
    temperature: float = 0.0

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")


@dataclass(frozen=True)
class TranslationResult:
    """Translated text plus whether any word-bearing span passed through untranslated."""

    text: str
    passthrough: bool = False


def _token_hash(token: str, seed: int) -> int:
    """Seeded 64-bit hash of a token (keyed blake2b, little-endian)."""
    key = seed.to_bytes(8, "little", signed=False)
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, key=key).digest()
    return int.from_bytes(digest, "little")


def mock_embed(text: str, dim: int = MOCK_EMBEDDING_DIM, seed: int = 0) -> np.ndarray:
    """Deterministic feature-hashing embedder for hermetic tests.

    Casefolds and splits the text on non-alphanumeric boundaries, maps each
    token through a seeded 64-bit hash to an index (low bits mod dim) and a
    sign (top bit), accumulates +/-1 per token occurrence, and L2-normalizes.
    A pure function of (text, dim, seed).
    """
    if dim < 8:
        raise ValueError(f"dim must be >= 8, got {dim}")
    tokens = tokenize(text)
    vec = np.zeros(dim, dtype=np.float64)
    for token in tokens:
        h = _token_hash(token, seed)
        sign = 1.0 if (h >> 63) & 1 == 0 else -1.0
        vec[h % dim] += sign
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ValueError("text contains no usable tokens to embed")
    return (vec / norm).astype(np.float32)


class MockEmbedder:
    """Offline embedding backend built on :func:`mock_embed`."""

    def __init__(self, dim: int = MOCK_EMBEDDING_DIM, seed: int = 0):
        self.dim = dim
        self.seed = seed

    def embed(self, text: str) -> np.ndarray:
        if not text.strip():
            raise ValueError("cannot embed empty text")
        return mock_embed(text, self.dim, self.seed)

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        return [self.embed(t) for t in texts]


class MockTranslator:
    """Exact-phrase dictionary translator for hermetic tests.

    Applies the lexicon for the requested direction with longest-match-first
    scanning on token boundaries; spans not covered by the lexicon pass
    through unchanged and set the ``passthrough`` flag on the result
    (deliberately mimicking MT that garbles unknown colloquialisms).
    """

    def __init__(self, lexicons: dict[Direction, dict[str, str]]):
        self._phrases: dict[Direction, list[str]] = {}
        self._lexicons = lexicons
        for direction, lex in lexicons.items():
            self._phrases[direction] = sorted(lex, key=len, reverse=True)

    def translate(self, text: str, direction: Direction) -> TranslationResult:
        if not text.strip():
            raise ValueError("cannot translate empty text")
        lexicon = self._lexicons.get(direction, {})
        phrases = self._phrases.get(direction, [])
        out: list[str] = []
        passthrough = False
        i = 0
        n = len(text)
        while i < n:
            replaced = False
            if i == 0 or not is_word_char(text[i - 1]):
                for phrase in phrases:
                    end = i + len(phrase)
                    if text.startswith(phrase, i) and (end == n or not is_word_char(text[end])):
                        out.append(lexicon[phrase])
                        i = end
                        replaced = True
                        break
            if not replaced:
                if is_word_char(text[i]):
                    passthrough = True
                out.append(text[i])
                i += 1
        return TranslationResult(text="".join(out), passthrough=passthrough)


class MockGenerator:
    """Extractive stand-in for the grounded generator.

    Parses the grounded prompt, scores every context sentence by token
    overlap with the question's content tokens, and returns the
    ``max_sentences`` best ones verbatim, in their original order
    (duplicates from overlapping chunks collapsed). When no sentence shares
    at least one content token it returns exactly ``UNAVAILABLE_MARKER``,
    which is the behaviour the grounding contract demands.
    """

    _TAG_SPLIT = re.compile(r"(?m)^\[[^\]\n]*\][ \t]*")

    def __init__(self, max_sentences: int = 3):
        self.max_sentences = max_sentences

    def generate(self, request: GenerationRequest) -> str:
        context, question = self._parse_prompt(request.prompt)
        question_tokens = {t for t in tokenize(question) if t not in _STOPWORDS}

        scored: list[tuple[int, int, str]] = []  # (overlap, order, sentence)
        seen: set[str] = set()
        order = 0
        for block in self._TAG_SPLIT.split(context):
            for sentence in split_sentences(block):
                if sentence in seen:
                    continue
                seen.add(sentence)
                overlap = len(set(tokenize(sentence)) & question_tokens)
                if overlap >= 1:
                    scored.append((overlap, order, sentence))
                order += 1
        if not scored:
            return UNAVAILABLE_MARKER
        best = sorted(scored, key=lambda s: (-s[0], s[1]))[: self.max_sentences]
        best.sort(key=lambda s: s[1])
        return " ".join(sentence for _, _, sentence in best)

    @staticmethod
    def _parse_prompt(prompt: str) -> tuple[str, str]:
        """Pull the context and question sections out of the grounded prompt."""
        q_pos = prompt.rfind("Question:")
        c_pos = prompt.find("Context:")
        if q_pos < 0 or c_pos < 0:
            return prompt, prompt
        question = prompt[q_pos + len("Question:"):]
        a_pos = question.find("Answer:")
        if a_pos >= 0:
            question = question[:a_pos]
        context = prompt[c_pos + len("Context:"): q_pos]
        return context, question.strip()


class _HttpBackend:
    """Shared JSON-over-HTTP POST with bounded retries."""

    def __init__(self, endpoint: BackendEndpoint):
        self.endpoint = endpoint

    def _post(self, path: str, payload: dict) -> dict:
        url = self.endpoint.url.rstrip("/") + path
        attempts = self.endpoint.retries + 1
        last_error: Exception | None = None
        for _ in range(attempts):
            try:
                resp = requests.post(url, json=payload, timeout=self.endpoint.timeout_ms / 1000.0)
            except requests.RequestException as exc:
                last_error = exc
                continue
            if 200 <= resp.status_code < 300:
                return resp.json()
            last_error = RuntimeError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        raise TransportError(
            f"POST {path} failed after {attempts} attempt(s): {last_error}", endpoint=url
        )


class HttpEmbedder(_HttpBackend):
    def __init__(self, endpoint: BackendEndpoint, dim: int = DEFAULT_EMBEDDING_DIM):
        super().__init__(endpoint)
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        if not text.strip():
            raise ValueError("cannot embed empty text")
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        body = self._post("/embed", {"texts": texts})
        if body.get("dim") != self.dim:
            raise TransportError(
                f"backend returned dim {body.get('dim')}, expected {self.dim}",
                endpoint=self.endpoint.url,
            )
        vectors = []
        for values in body["vectors"]:
            vec = np.asarray(values, dtype=np.float32)
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise TransportError("backend returned a zero vector", endpoint=self.endpoint.url)
            vectors.append((vec / norm).astype(np.float32))
        return vectors


class HttpTranslator(_HttpBackend):
    def translate(self, text: str, direction: Direction) -> TranslationResult:
        if not text.strip():
            raise ValueError("cannot translate empty text")
        source, target = ("bn", "en") if direction == "bn_to_en" else ("en", "bn")
        body = self._post("/translate", {"text": text, "source": source, "target": target})
        return TranslationResult(text=body["text"], passthrough=False)


class HttpGenerator(_HttpBackend):
    def generate(self, request: GenerationRequest) -> str:
        body = self._post(
            "/generate",
            {
                "prompt": request.prompt,
                "max_tokens": request.max_tokens,
                "temperature": request.temperature,
            },
        )
        return body["text"]


@dataclass
class Clients:
    """The three capability clients the pipeline consumes."""

    embedder: MockEmbedder | HttpEmbedder
    translator: MockTranslator | HttpTranslator
    generator: MockGenerator | HttpGenerator = field(default_factory=MockGenerator)
