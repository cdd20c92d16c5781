# causal_friendliness/adapters/behavior_file.py
"""Reader for behavior tables stored as JSON.

Either a bare nested list p[a][b][x][y] or an object ``{"p": [...]}``; index 0
is outcome +1 and index 1 is outcome -1.
"""
from __future__ import annotations

import json
import logging
from typing import Any

from pydantic import ValidationError

from causal_friendliness.adapters.spec_file import locate
from causal_friendliness.core.errors import UsageError
from causal_friendliness.core.models import BehaviorTable

log = logging.getLogger(__name__)

BEHAVIOR_SUFFIX = ".json"


def parse_behavior(payload: Any, source: str = "<behavior>") -> BehaviorTable:
    table = payload.get("p") if isinstance(payload, dict) else payload
    if table is None:
        raise UsageError(f"{source}: expected a nested list or an object with key 'p'")
    try:
        return BehaviorTable(p=table)
    except (ValidationError, ValueError) as e:
        raise UsageError(f"{source}: not a valid behavior table: {e}") from None


def load_behavior(path: str) -> BehaviorTable:
    located = locate(path, "behaviors", BEHAVIOR_SUFFIX)
    try:
        payload = json.loads(located.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}:{e.lineno}: invalid JSON ({e.msg})") from None
    log.debug("loaded behavior from %s", located)
    return parse_behavior(payload, source=str(path))
