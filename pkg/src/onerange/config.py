"""Run configuration: a flat key-value JSON document with a stable hash."""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import asdict, dataclass, fields, replace

from .errors import DomainError


@dataclass(frozen=True)
class RunConfig:
    radial_nodes: int = 64
    angular_nodes: int = 64
    quadrature_rtol: float = 1e-8
    quadrature_refinements: int = 2
    gram_nodes: int = 200
    classify_start: int = 32
    classify_doublings: int = 8
    classify_tolerance: float = 1e-8
    classify_margin: float = 0.1
    probe_terms: int = 4096
    # indices below this are cross-checked against exact rational coefficients
    exact_crossover: int = 64
    momentum_panel_nodes: int = 32
    momentum_tail_nodes: int = 64
    output_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        for name in ("quadrature_rtol", "classify_tolerance", "classify_margin"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        for name in ("radial_nodes", "angular_nodes", "gram_nodes", "momentum_panel_nodes", "momentum_tail_nodes"):
            if getattr(self, name) < 2:
                raise DomainError(f"{name} must be at least 2")
        if self.classify_start < 16 or self.classify_doublings < 3:
            raise DomainError("classification needs start >= 16 and at least 3 doublings")
        if self.probe_terms < 16 or self.quadrature_refinements < 1 or self.exact_crossover < 0:
            raise DomainError("probe_terms >= 16, quadrature_refinements >= 1, exact_crossover >= 0 required")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name: f.type for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise DomainError(f"unknown config keys: {', '.join(unknown)}")
        casts = {"int": int, "float": float, "str": str}
        out = {}
        for key, value in data.items():
            if isinstance(value, (dict, list)):
                raise DomainError(f"config must be flat; {key} is nested")
            try:
                out[key] = casts[known[key]](value)
            except (TypeError, ValueError) as exc:
                raise DomainError(f"config key {key}: {exc}") from None
        return cls(**out)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path) -> None:
        atomic_write(path, self.to_json())

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def config_hash(self) -> str:
        """sha256 of the canonical document, output directory excluded."""
        d = self.to_dict()
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def atomic_write(path, text: str) -> None:
    """Write to a temporary file in the same directory, then rename over ``path``."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
