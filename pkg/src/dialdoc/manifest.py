"""Run manifests: one sidecar JSON per output file.

A manifest pins the command, the digest of its resolved configuration, and
the digests of every input and output, so a re-run can be checked for
byte-exact reproduction. Only the timestamp may differ between identical
runs.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

from . import __version__


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def config_digest(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_manifest(
    output_path: str | Path,
    *,
    command: str,
    config: dict,
    inputs: list[str | Path],
):
    output_path = Path(output_path)
    manifest = {
        "command": command,
        "config": config,
        "config_digest": config_digest(config),
        "input_digests": [
            {"path": str(p), "sha256": file_digest(p)} for p in inputs
        ],
        "output": {"path": str(output_path), "sha256": file_digest(output_path)},
        "tool_version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    manifest_path = output_path.with_name(output_path.name + ".manifest.json")
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, sort_keys=True, ensure_ascii=False, indent=2)
        f.write("\n")
    return manifest_path
