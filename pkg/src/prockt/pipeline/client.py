"""Chat-completion clients: a real HTTP client and a deterministic mock.

The wire contract is the common hosted chat shape: POST JSON
``{model, messages: [{role, content}, ...], temperature}``; the reply's
first choice's message content is the completion text.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass
from typing import Protocol

import numpy as np
import requests

from ..data.schema import DIMENSIONS

ENDPOINT_ENV = "PROCKT_CHAT_ENDPOINT"
API_KEY_ENV = "PROCKT_CHAT_API_KEY"
MODEL_ENV = "PROCKT_CHAT_MODEL"


class ChatClientError(RuntimeError):
    """A completion could not be obtained (after retries, if any)."""


@dataclass
class ChatParams:
    temperature: float = 0.0
    max_retries: int = 3
    timeout: float = 60.0


class ChatClient(Protocol):
    def complete(self, system_message: str, user_message: str, params: ChatParams) -> str:
        ...


class HttpChatClient:
    """Client for any chat-completions-compatible HTTP endpoint.

    Endpoint, model, and API key default to the PROCKT_CHAT_* environment
    variables. Retries with exponential backoff on transport errors and
    non-2xx responses.
    """

    def __init__(self, endpoint: str | None = None, model: str | None = None,
                 api_key: str | None = None, session: requests.Session | None = None,
                 backoff: float = 0.5):
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
        self.model = model or os.environ.get(MODEL_ENV, "gpt-5")
        self.api_key = api_key or os.environ.get(API_KEY_ENV)
        self.session = session or requests.Session()
        self.backoff = backoff
        if not self.endpoint:
            raise ChatClientError(
                f"no chat endpoint configured (set {ENDPOINT_ENV} or pass endpoint=)")

    def complete(self, system_message: str, user_message: str, params: ChatParams) -> str:
        messages = []
        if system_message:
            messages.append({"role": "system", "content": system_message})
        messages.append({"role": "user", "content": user_message})
        payload = {"model": self.model, "messages": messages,
                   "temperature": params.temperature}
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(params.max_retries):
            try:
                resp = self.session.post(self.endpoint, json=payload, headers=headers,
                                         timeout=params.timeout)
                resp.raise_for_status()
                doc = resp.json()
                return doc["choices"][0]["message"]["content"]
            except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                if attempt + 1 < params.max_retries:
                    time.sleep(self.backoff * (2 ** attempt))
        raise ChatClientError(f"chat completion failed after {params.max_retries} "
                              f"attempts: {last_error}")


# -- deterministic mock ---------------------------------------------------

_CODE_KEY_RE = re.compile(r'"((?:CU|SC|PF|AR)[0-9]+)"\s*:')
_ANSWER_RE = re.compile(r'\{\s*"((?:CU|SC|PF|AR)[0-9]+)"\s*:\s*"((?:[^"\\]|\\.)*)"\s*\}')

_INDICATOR_PHRASES = [
    "Identify the quantities given in the problem",
    "State the concept needed to solve the problem",
    "Choose a strategy that simplifies the expression",
    "Carry out the computation step by step",
    "Check the result against the problem's conditions",
    "Explain why the chosen approach works",
    "Relate the problem to a similar solved problem",
    "Interpret the final value in context",
]


def _seed_from(*parts: str) -> int:
    digest = hashlib.sha256("\x1f".join(parts).encode()).digest()
    return int.from_bytes(digest[:8], "little")


class MockChatClient:
    """Rule-based stand-in for a hosted model.

    Outputs are a pure function of the prompt text (hash-seeded), schema
    valid, and stage-aware, so the full pipeline runs offline and
    bit-identically across runs.
    """

    def __init__(self, satisfy_prob: float = 0.7, unanswered_prob: float = 0.2):
        self.satisfy_prob = satisfy_prob
        self.unanswered_prob = unanswered_prob
        self.calls = 0

    def complete(self, system_message: str, user_message: str, params: ChatParams) -> str:
        self.calls += 1
        if user_message.startswith("You are Teacher GPT.\nYour task is to analyze"):
            return self._indicators(user_message)
        if user_message.startswith("You are Student GPT"):
            return self._responses(user_message)
        if "evaluate a student's responses" in user_message[:200]:
            return self._verdicts(user_message)
        raise ChatClientError("mock client: unrecognized prompt")

    def _indicators(self, prompt: str) -> str:
        rng = np.random.default_rng(_seed_from("indicators", prompt))
        n = int(rng.integers(8, 16))
        # every dimension gets at least one indicator; the rest are random
        cats = list(DIMENSIONS) + [DIMENSIONS[int(rng.integers(0, 4))] for _ in range(n - 4)]
        rng.shuffle(cats)
        ordinals = {d: 0 for d in DIMENSIONS}
        entries = []
        for cat in cats:
            ordinals[cat] += 1
            phrase = _INDICATOR_PHRASES[int(rng.integers(0, len(_INDICATOR_PHRASES)))]
            entries.append({f"{cat}{ordinals[cat]}": phrase})
        body = json.dumps({"mathematical_proficiency_indicators": entries}, indent=2)
        if rng.random() < 0.5:
            return f"Here is the rubric.\n```json\n{body}\n```"
        return body

    @staticmethod
    def _input_codes(prompt: str, marker: str) -> list[str]:
        section = prompt[prompt.rfind(marker) + len(marker):]
        codes = []
        for m in _CODE_KEY_RE.finditer(section):
            if m.group(1) not in codes:
                codes.append(m.group(1))
        return codes

    def _responses(self, prompt: str) -> str:
        codes = self._input_codes(prompt, "Input Indicators: [")
        out = {}
        for code in codes:
            rng = np.random.default_rng(_seed_from("response", prompt, code))
            roll = rng.random()
            if roll < self.unanswered_prob:
                out[code] = "I don't know"
            elif roll < self.unanswered_prob + 0.2:
                out[code] = f"Not written, but likely the step for {code} was done mentally."
            else:
                out[code] = f"The written work shows the step for {code}."
        return json.dumps(out, indent=2)

    def _verdicts(self, prompt: str) -> str:
        section = prompt[prompt.rfind("Answer Indicate: ["):]
        verdicts = {}
        for code, answer in _ANSWER_RE.findall(section):
            if code in verdicts:
                continue
            if answer.startswith("I don't know"):
                verdicts[code] = 0
            else:
                rng = np.random.default_rng(_seed_from("verdict", prompt, code))
                verdicts[code] = int(rng.random() < self.satisfy_prob)
        return json.dumps(verdicts)
