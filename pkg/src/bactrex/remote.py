"""Shared HTTP plumbing for the model-backend wire protocol.

The protocol is JSON over HTTP POST, UTF-8 bodies:

* ``POST <endpoint>/ner``   body ``{"sentences": [str, ...]}`` ->
  ``{"mentions": [[{"start": int, "end": int, "label": str}, ...], ...]}``
  with one mention list per input sentence, same order.
* ``POST <endpoint>/score`` body ``{"instances": [str, ...]}`` ->
  ``{"scores": [float, ...]}`` with one score in [0, 1] per instance,
  same order. A length mismatch is a protocol violation.
"""

from __future__ import annotations

import json

import requests

from bactrex.errors import BactrexError

__all__ = ["Transport", "Timeout", "ProtocolViolation", "post_json"]

DEFAULT_TIMEOUT = 30.0


class Transport(BactrexError):
    """The endpoint could not be reached or returned a non-success status."""


class Timeout(Transport):
    """The endpoint did not answer within the allotted time."""


class ProtocolViolation(BactrexError):
    """The endpoint answered, but not in the agreed wire format."""


def post_json(url: str, payload: dict, timeout: float = DEFAULT_TIMEOUT) -> dict:
    """POST a JSON body and return the decoded JSON object response."""
    try:
        response = requests.post(url, json=payload, timeout=timeout)
    except requests.Timeout as exc:
        raise Timeout(f"{url}: timed out after {timeout}s") from exc
    except requests.RequestException as exc:
        raise Transport(f"{url}: {exc}") from exc
    if response.status_code != 200:
        raise Transport(f"{url}: HTTP {response.status_code}: {response.text[:200]}")
    try:
        body = response.json()
    except (json.JSONDecodeError, ValueError) as exc:
        raise ProtocolViolation(f"{url}: response is not JSON") from exc
    if not isinstance(body, dict):
        raise ProtocolViolation(f"{url}: response must be a JSON object, got {type(body).__name__}")
    return body
