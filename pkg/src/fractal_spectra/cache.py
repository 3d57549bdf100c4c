"""Version-salted text-artifact cache for meshes and spectra."""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

from . import __version__

ENV_VAR = "FRACTAL_SPECTRA_CACHE"


def cache_dir() -> Path:
    override = os.environ.get(ENV_VAR)
    if override:
        return Path(override)
    return Path.home() / ".cache" / "fractal_spectra"


def cache_key(kind: str, **params) -> str:
    payload = json.dumps(
        {"kind": kind, "version": __version__, **params}, sort_keys=True
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:20]


def load(kind: str, suffix: str, **params) -> str | None:
    path = cache_dir() / f"{cache_key(kind, **params)}.{suffix}"
    if path.exists():
        return path.read_text()
    return None


def store(text: str, kind: str, suffix: str, **params) -> Path:
    d = cache_dir()
    d.mkdir(parents=True, exist_ok=True)
    path = d / f"{cache_key(kind, **params)}.{suffix}"
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)
    return path
