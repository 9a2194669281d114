"""Run manifests: deterministic reproducibility sidecars for CLI outputs."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

VERSION = "0.1.0"


def sha256_file(path: Path | str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """Everything needed to reproduce an output file bit for bit.

    Deliberately contains no timestamps: rerunning a command with the
    recorded parameters and seed must regenerate identical bytes.
    """

    command: str
    parameters: dict
    seed: int
    version: str = VERSION
    outputs: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"


def write_manifest(manifest: RunManifest, out_path: Path | str) -> Path:
    """Write the sidecar ``<out_path>.manifest.json`` and return its path."""
    sidecar = Path(str(out_path) + ".manifest.json")
    sidecar.write_text(manifest.to_json(), encoding="utf-8")
    return sidecar


def build_manifest(command: str, parameters: dict, seed: int, outputs) -> RunManifest:
    """Assemble a manifest, checksumming every produced output file."""
    checksums = {Path(p).name: sha256_file(p) for p in outputs}
    return RunManifest(command=command, parameters=parameters, seed=seed, outputs=checksums)
