"""Table-to-text serialization and the optional remote table-QA client."""

from __future__ import annotations

import hashlib
import json
import os
import socket
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Callable

from argus.errors import HttpError, IoFailure, MalformedResponse, QaTimeout
from argus.query.sql import QueryResult

ELLIPSIS = "…"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bytes, memoryview)):
        return bytes(v).hex()
    return str(v).replace("\n", " ").replace("|", "\\|")


def serialize_table_for_qa(result: QueryResult, max_rows: int = 20, max_chars: int = 4000) -> str:
    """Pipe-delimited header and rows; rows beyond ``max_rows`` or the character
    budget are replaced by a count.  The output never exceeds ``max_chars``."""
    if max_rows < 1:
        raise ValueError("max_rows must be >= 1")
    header = " | ".join(_cell(c) for c in result.columns)
    lines = [" | ".join(_cell(v) for v in row) for row in result.rows[:max_rows]]

    def render(kept: int) -> str:
        more = len(result.rows) - kept
        body = [header, *lines[:kept]]
        if more:
            body.append(f"{ELLIPSIS} ({more} more rows)")
        return "\n".join(body)

    kept = len(lines)
    text = render(kept)
    while len(text) > max_chars and kept > 0:
        kept -= 1
        text = render(kept)
    if len(text) <= max_chars:
        return text
    # the header alone is over budget: keep the marker whole if possible
    marker = text[len(header):]
    room = max_chars - len(marker)
    return header[:room] + marker if room >= 0 else marker.lstrip("\n")[:max_chars]


@dataclass(frozen=True)
class RemoteQaConfig:
    url: str
    timeout: float = 30.0
    token: str | None = None

    @classmethod
    def from_env(cls, env=None) -> RemoteQaConfig | None:
        env = os.environ if env is None else env
        url = env.get("ARGUS_QA_ENDPOINT")
        if not url:
            return None
        return cls(url, float(env.get("ARGUS_QA_TIMEOUT", "30")), env.get("ARGUS_QA_TOKEN") or None)

    def __repr__(self) -> str:
        # keep the token out of logs and tracebacks
        return f"RemoteQaConfig(url={self.url!r}, timeout={self.timeout!r}, token={'***' if self.token else None})"


@dataclass(frozen=True)
class QaExchange:
    """What gets logged for one call; deliberately excludes the token."""

    endpoint: str
    question: str
    table_sha256: str
    status: int | None
    answer: str | None
    elapsed_s: float


def remote_qa(question: str, table: str, config: RemoteQaConfig,
              log: Callable[[QaExchange], None] | None = None) -> str:
    """POST ``{"question", "table"}`` as JSON and return the response's ``answer``."""
    payload = json.dumps({"question": question, "table": table}).encode("utf-8")
    headers = {"Content-Type": "application/json", "Accept": "application/json"}
    if config.token:
        headers["Authorization"] = f"Bearer {config.token}"
    req = urllib.request.Request(config.url, data=payload, headers=headers, method="POST")
    digest = hashlib.sha256(table.encode("utf-8")).hexdigest()
    started = time.monotonic()
    status: int | None = None
    answer: str | None = None
    try:
        try:
            with urllib.request.urlopen(req, timeout=config.timeout) as resp:
                status = resp.status
                body = resp.read()
        except urllib.error.HTTPError as exc:
            status = exc.code
            raise HttpError(exc.code, str(exc.reason)) from None
        except (socket.timeout, TimeoutError):
            raise QaTimeout(f"no answer from {config.url} within {config.timeout} s") from None
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, (socket.timeout, TimeoutError)):
                raise QaTimeout(f"no answer from {config.url} within {config.timeout} s") from None
            raise IoFailure(f"cannot reach {config.url}: {exc.reason}") from None
        try:
            doc = json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise MalformedResponse(f"response is not JSON: {exc}") from None
        if not isinstance(doc, dict) or not isinstance(doc.get("answer"), str):
            raise MalformedResponse("response has no string 'answer' field")
        answer = doc["answer"]
        return answer
    finally:
        if log is not None:
            log(QaExchange(config.url, question, digest, status, answer, time.monotonic() - started))
