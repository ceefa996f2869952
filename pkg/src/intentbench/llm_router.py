"""Prompt-based intent classifier over a chat-completion transport.

Two prompt variants are supported: ``simple`` (class definitions only) and
``augmented`` (definitions plus labeled training examples inlined as JSON).
The transport is any callable taking a :class:`CompletionRequest` and
returning the completion text, which keeps everything testable offline.
"""
from __future__ import annotations

import json
import os
import random
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .dataset import CLASS_ORDER, Corpus, IntentLabel, LabeledUtterance
from .errors import (ConfigError, ExhaustedRetries, MissingExamples, ProviderUnavailable,
                     TransportError, UnknownLabel, UnparseableResponse)

VARIANTS = ("simple", "augmented")
VERDICT_KEYS = ("category", "class", "label")
EXAMPLES_HEADER = "Here you have some examples"
FORMAT_REMINDER = ('Reply with a single JSON object and nothing else, for example '
                   '{"category": "Conversation"}.')

DEFAULT_DEFINITIONS = {
    IntentLabel.CONVERSATION: (
        "chit-chat, greetings, thanks and confirmations, general knowledge or "
        "programming questions, requests to summarize a text, and questions "
        "about how a word or short phrase is said or what it means in another "
        "language."),
    IntentLabel.SERVICES: (
        "requests to find, recommend or book something in the physical world, "
        "such as hotel rooms, restaurant tables, cinema tickets, meeting rooms "
        "or sightseeing in a given city."),
    IntentLabel.DOCUMENT_TRANSLATION: (
        "requests to translate a whole named document or file into a target "
        "language. The message names the file and the language; it never asks "
        "for a summary."),
}

DEFAULT_HIERARCHY = (
    "Decide in two steps. First check whether the message is Conversation. "
    "Only if it is not, choose between Services and Document_Translation.")

DEFAULT_OUTPUT_FORMAT = (
    'Answer only with a JSON object of the form {"category": "<class>"} where '
    "<class> is Conversation, Services or Document_Translation.")


def render_definitions(definitions: dict[IntentLabel, str] | None = None) -> str:
    defs = definitions or DEFAULT_DEFINITIONS
    return "\n".join(f"- {lab.value}: {defs[lab]}" for lab in CLASS_ORDER)


DEFAULT_TEMPLATE = (
    "You route messages sent to a corporate assistant. Classify the message "
    "into exactly one of three classes.\n\n"
    "Classes:\n" + render_definitions() + "\n\n"
    + DEFAULT_HIERARCHY + "\n\n"
    + DEFAULT_OUTPUT_FORMAT + "\n"
    "{examples}\n"
    "Message: {question}\n")

_PLACEHOLDER = re.compile(r"\{(question|examples)\}")


@dataclass(frozen=True)
class PromptTemplate:
    """Plain text with ``{question}`` and ``{examples}`` placeholders."""

    text: str = DEFAULT_TEMPLATE

    def __post_init__(self):
        if "{question}" not in self.text:
            raise ConfigError("prompt template must contain a {question} placeholder")

    @classmethod
    def load(cls, path) -> "PromptTemplate":
        return cls(Path(path).read_text(encoding="utf-8"))

    def render(self, question: str, examples_block: str = "") -> str:
        # single pass, so braces inside the question are never re-expanded
        values = {"question": question, "examples": examples_block}
        return _PLACEHOLDER.sub(lambda m: values[m.group(1)], self.text)


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    max_tokens: int = 50
    temperature: float = 0.0
    model_id: str = "default"

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ConfigError("max_tokens must be >= 1")
        if not self.temperature >= 0:
            raise ConfigError("temperature must be >= 0")

    def to_json(self) -> dict:
        return {"prompt": self.prompt, "max_tokens": self.max_tokens,
                "temperature": self.temperature, "model_id": self.model_id}


Transport = Callable[[CompletionRequest], str]


@dataclass(frozen=True)
class ExampleBudget:
    conversation: int = 500
    services: int = 26
    document_translation: int = 140

    def cap(self, label: IntentLabel) -> int:
        return (self.conversation, self.services, self.document_translation)[label.index]

    @property
    def total(self) -> int:
        return self.conversation + self.services + self.document_translation


@dataclass(frozen=True)
class RouterVerdict:
    label: IntentLabel
    raw_response: str
    parse_attempts: int
    latency: float

    def to_dict(self) -> dict:
        return {"label": self.label.value, "raw_response": self.raw_response,
                "parse_attempts": self.parse_attempts, "latency": self.latency}


# -- prompts ---------------------------------------------------------------

def select_examples(train: Corpus | Sequence[LabeledUtterance], budget: ExampleBudget = ExampleBudget(),
                    seed: int = 0) -> list[LabeledUtterance]:
    """Up to ``budget.cap(c)`` items of each class, drawn uniformly without
    replacement when a class has more. Corpus order is kept."""
    items = list(train)
    rng = random.Random(seed)
    chosen: list[int] = []
    for lab in CLASS_ORDER:
        idx = [i for i, u in enumerate(items) if u.label is lab]
        cap = budget.cap(lab)
        chosen.extend(idx if len(idx) <= cap else rng.sample(idx, cap))
    return [items[i] for i in sorted(chosen)]


def examples_block(examples: Sequence[LabeledUtterance]) -> str:
    rows = ",\n".join("  " + json.dumps({"text": u.text, "class": u.label.value}, ensure_ascii=False)
                      for u in examples)
    return f"\n{EXAMPLES_HEADER}:\n[\n{rows}\n]\n"


def build_prompt(question: str, variant: str = "simple", examples: Sequence[LabeledUtterance] | None = None,
                 template: PromptTemplate | None = None) -> str:
    if variant not in VARIANTS:
        raise ConfigError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if not question or not question.strip():
        raise ConfigError("question must be non-empty")
    template = template or PromptTemplate()
    block = ""
    if variant == "augmented":
        if not examples:
            raise MissingExamples("the augmented variant needs labeled examples")
        block = examples_block(examples)
    return template.render(question, block)


# -- parsing ---------------------------------------------------------------

_DECODER = json.JSONDecoder()


def _json_objects(text: str):
    pos = text.find("{")
    while pos != -1:
        try:
            obj, end = _DECODER.raw_decode(text, pos)
        except (ValueError, RecursionError):
            pos = text.find("{", pos + 1)
            continue
        if isinstance(obj, dict):
            yield obj
        pos = text.find("{", end)


def parse_verdict(raw: str | bytes) -> IntentLabel:
    """Label from the first JSON object carrying a class field.

    Raises :class:`UnparseableResponse` when no such object exists and
    :class:`UnknownLabel` when the field holds something else.
    """
    if isinstance(raw, (bytes, bytearray)):
        raw = bytes(raw).decode("utf-8", errors="replace")
    if not isinstance(raw, str):
        raise UnparseableResponse(repr(raw), "response is not text")
    found_object = False
    for obj in _json_objects(raw):
        found_object = True
        for key in VERDICT_KEYS:
            if key in obj:
                return IntentLabel.parse(obj[key], lenient=True)
    reason = "JSON object has no category field" if found_object else "no JSON object found"
    raise UnparseableResponse(raw, reason)


# -- transports ------------------------------------------------------------

class HttpTransport:
    """POSTs ``{"prompt","max_tokens","temperature","model_id"}`` and reads
    ``{"text"}`` back. An optional bearer token comes from an env var."""

    def __init__(self, endpoint: str, auth_env_var: str | None = None, timeout: float = 30.0,
                 client=None):
        self.endpoint = endpoint
        self.auth_env_var = auth_env_var
        self.timeout = timeout
        self._client = client

    def _headers(self) -> dict:
        if not self.auth_env_var:
            return {}
        token = os.environ.get(self.auth_env_var)
        if not token:
            raise ConfigError(f"environment variable {self.auth_env_var} is not set")
        return {"Authorization": f"Bearer {token}"}

    def __call__(self, request: CompletionRequest) -> str:
        import httpx

        headers = self._headers()
        try:
            if self._client is not None:
                resp = self._client.post(self.endpoint, json=request.to_json(), headers=headers)
            else:
                with httpx.Client(timeout=self.timeout) as client:
                    resp = client.post(self.endpoint, json=request.to_json(), headers=headers)
        except httpx.HTTPError as exc:
            raise TransportError(f"completion request failed: {exc}") from None
        if resp.status_code != 200:
            raise ProviderUnavailable(resp.status_code, resp.text)
        try:
            payload = resp.json()
        except ValueError:
            raise TransportError("completion response is not JSON") from None
        text = payload.get("text") if isinstance(payload, dict) else None
        if not isinstance(text, str):
            raise TransportError("completion response lacks a string 'text' field")
        return text


class MockTransport:
    """Offline transport. ``reply`` is a fixed string, a list of strings
    played in order (the last one repeats) or a callable on the request.
    Every request is recorded; ``delay`` seconds are slept per call."""

    def __init__(self, reply: str | Sequence[str] | Callable[[CompletionRequest], str] = '{"category": "Conversation"}',
                 delay: float = 0.0):
        self.reply = reply
        self.delay = delay
        self.requests: list[CompletionRequest] = []

    def __call__(self, request: CompletionRequest) -> str:
        n = len(self.requests)
        self.requests.append(request)
        if self.delay:
            time.sleep(self.delay)
        if callable(self.reply):
            return self.reply(request)
        if isinstance(self.reply, str):
            return self.reply
        return self.reply[min(n, len(self.reply) - 1)]


# -- classification --------------------------------------------------------

def classify(question: str, variant: str, transport: Transport, retries: int = 2,
             examples: Sequence[LabeledUtterance] | None = None, template: PromptTemplate | None = None,
             model_id: str = "default", max_tokens: int = 50, temperature: float = 0.0) -> RouterVerdict:
    """Prompt, call, parse. A response without a usable verdict is retried
    up to ``retries`` more times with a format reminder appended."""
    if retries < 0:
        raise ConfigError("retries must be >= 0")
    prompt = build_prompt(question, variant, examples, template)
    start = time.perf_counter()
    raw = ""
    for attempt in range(1, retries + 2):
        text = prompt if attempt == 1 else f"{prompt}\n{FORMAT_REMINDER}\n"
        raw = transport(CompletionRequest(text, max_tokens, temperature, model_id))
        try:
            label = parse_verdict(raw)
        except (UnparseableResponse, UnknownLabel):
            continue
        return RouterVerdict(label, raw if isinstance(raw, str) else repr(raw), attempt,
                             time.perf_counter() - start)
    raise ExhaustedRetries(retries + 1, raw if isinstance(raw, str) else repr(raw))


def classify_many(questions: Sequence[str], variant: str, transport: Transport, max_in_flight: int = 1,
                  **kwargs) -> list[RouterVerdict]:
    """Classify in input order with at most ``max_in_flight`` concurrent calls."""
    if max_in_flight < 1:
        raise ConfigError("max_in_flight must be >= 1")
    if max_in_flight == 1:
        return [classify(q, variant, transport, **kwargs) for q in questions]
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        return list(pool.map(lambda q: classify(q, variant, transport, **kwargs), questions))


@dataclass
class LlmClassifier:
    """Adapter giving the router the same ``predict`` shape as the trained
    backends. Inputs are raw utterances, not vectors."""

    transport: Transport
    variant: str = "simple"
    examples: Sequence[LabeledUtterance] | None = None
    retries: int = 2
    model_id: str = "default"
    template: PromptTemplate | None = None
    concurrent_safe = True
    input_kind = "text"
    latency_convention = "round-trip"

    def predict(self, question: str) -> tuple[IntentLabel, RouterVerdict]:
        v = classify(question, self.variant, self.transport, self.retries, self.examples,
                     self.template, self.model_id)
        return v.label, v


_DOC_HINT = re.compile(r"\.(pdf|docx?|pptx|xlsx|txt)\b|\b(document|file|archivo|documento)\b", re.I)
_SERVICE_HINT = re.compile(r"\b(book|reserv\w*|hotel|table|mesa|tickets?|cinema|tour|sightseeing)\b", re.I)
_TRANSLATE_HINT = re.compile(r"\b(translat\w*|traduc\w*|version)\b", re.I)


def keyword_responder(request: CompletionRequest) -> str:
    """Crude offline stand-in for a language model, for use with
    :class:`MockTransport`. Looks only at the text after the last
    ``Message:`` marker."""
    message = request.prompt.rsplit("Message:", 1)[-1]
    if _DOC_HINT.search(message) and _TRANSLATE_HINT.search(message):
        label = IntentLabel.DOCUMENT_TRANSLATION
    elif _SERVICE_HINT.search(message):
        label = IntentLabel.SERVICES
    else:
        label = IntentLabel.CONVERSATION
    return json.dumps({"category": label.value})
