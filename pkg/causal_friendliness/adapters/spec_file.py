# causal_friendliness/adapters/spec_file.py
"""Reader for experiment spec files.

One ``key = value`` pair per line, ``#`` starts a comment. Bloch vectors are
three comma-separated reals in (x, y, z) order::

    input_state = maximally_mixed
    charlie = 0, 0, 1
    alice   = 1, 0, 0
    debbie  = 0.70710678, 0, 0.70710678
    bob     = -0.70710678, 0, 0.70710678
"""
from __future__ import annotations

import logging
import math
from importlib import resources
from pathlib import Path
from typing import Dict, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from causal_friendliness.core.errors import CausalFriendlinessError, SpecParseError, UsageError
from causal_friendliness.core.models import ScenarioConfig
from causal_friendliness.core.tensor import BlochVector, DensityMatrix

log = logging.getLogger(__name__)

PARTIES = ("charlie", "alice", "debbie", "bob")
KNOWN_KEYS = {"input_state", "input_polar", "input_azimuth", "tolerance", "seed", *PARTIES}
SPEC_SUFFIX = ".spec"


class SpecFile(BaseModel):
    model_config = ConfigDict(frozen=True)

    source: str = "<spec>"
    input_state: Literal["maximally_mixed", "pure"] = "maximally_mixed"
    input_polar: float = 0.0
    input_azimuth: float = 0.0
    charlie: BlochVector
    alice: BlochVector
    debbie: BlochVector
    bob: BlochVector
    tolerance: Optional[float] = None
    seed: Optional[int] = None

    def density_matrix(self) -> DensityMatrix:
        if self.input_state == "pure":
            return DensityMatrix.pure_qubit(self.input_polar, self.input_azimuth)
        return DensityMatrix.maximally_mixed()

    def scenario(self) -> ScenarioConfig:
        return ScenarioConfig(
            input_state=self.density_matrix(),
            charlie=self.charlie,
            alice=self.alice,
            debbie=self.debbie,
            bob=self.bob,
        )


# ----------------------------- parsing ---------------------------------

def _float(raw: str, key: str, line: int, source: str) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise SpecParseError(f"{key}: expected a real number, got {raw!r}", line, source) from None
    if not math.isfinite(v):
        raise SpecParseError(f"{key}: value must be finite", line, source)
    return v


def _bloch(raw: str, key: str, line: int, source: str) -> BlochVector:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 3:
        raise SpecParseError(f"{key}: expected three comma-separated components, got {len(parts)}", line, source)
    x, y, z = (_float(p, key, line, source) for p in parts)
    try:
        return BlochVector.normalized(x, y, z)
    except (CausalFriendlinessError, ValueError) as e:
        raise SpecParseError(f"{key}: {e}", line, source) from None


def _split(text: str, source: str) -> Dict[str, Tuple[str, int]]:
    entries: Dict[str, Tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise SpecParseError(f"expected 'key = value', got {body!r}", lineno, source)
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in KNOWN_KEYS:
            raise SpecParseError(f"unknown key {key!r}", lineno, source)
        if key in entries:
            raise SpecParseError(f"duplicate key {key!r} (first on line {entries[key][1]})", lineno, source)
        if not value:
            raise SpecParseError(f"{key}: missing value", lineno, source)
        entries[key] = (value, lineno)
    return entries


def parse_spec(text: str, source: str = "<spec>") -> SpecFile:
    entries = _split(text, source)
    fields: Dict[str, object] = {"source": source}
    for party in PARTIES:
        if party in entries:
            value, line = entries[party]
            fields[party] = _bloch(value, party, line, source)
    missing = [p for p in PARTIES if p not in entries]
    if missing:
        raise SpecParseError(f"missing observable(s): {', '.join(missing)}", None, source)

    if "input_state" in entries:
        value, line = entries["input_state"]
        if value not in ("maximally_mixed", "pure"):
            raise SpecParseError(f"input_state must be 'maximally_mixed' or 'pure', got {value!r}", line, source)
        fields["input_state"] = value
    for key in ("input_polar", "input_azimuth"):
        if key in entries:
            value, line = entries[key]
            if fields.get("input_state") != "pure":
                raise SpecParseError(f"{key} only applies to a pure input state", line, source)
            fields[key] = _float(value, key, line, source)

    if "tolerance" in entries:
        value, line = entries["tolerance"]
        tol = _float(value, "tolerance", line, source)
        if tol <= 0:
            raise SpecParseError("tolerance must be positive", line, source)
        fields["tolerance"] = tol
    if "seed" in entries:
        value, line = entries["seed"]
        try:
            fields["seed"] = int(value)
        except ValueError:
            raise SpecParseError(f"seed: expected an integer, got {value!r}", line, source) from None

    spec = SpecFile(**fields)
    log.debug("parsed spec %s (input %s)", source, spec.input_state)
    return spec


# ----------------------------- loading ---------------------------------

def resolve_bundled(name: str, folder: str, suffix: str) -> Path:
    """Map a bare name like ``paper_optimal`` onto a file shipped with the package."""
    filename = name if name.endswith(suffix) else name + suffix
    return Path(str(resources.files("causal_friendliness") / folder / filename))


def locate(path: str, folder: str, suffix: str) -> Path:
    p = Path(path)
    if p.is_file():
        return p
    if p.parent == Path("."):
        bundled = resolve_bundled(p.name, folder, suffix)
        if bundled.is_file():
            return bundled
    raise UsageError(f"{path}: no such file")


def load_spec(path: str) -> SpecFile:
    located = locate(path, "specs", SPEC_SUFFIX)
    return parse_spec(located.read_text(encoding="utf-8"), source=str(path))
