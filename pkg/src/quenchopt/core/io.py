"""Result files: UTF-8 CSV with a header row, JSON summaries, pulse text files."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from pathlib import Path
from typing import Iterable

from quenchopt.formatters import CSV_SCHEMAS, format_pulse, parse_pulse
from quenchopt.models import Pulse, RunManifest
from quenchopt.services.pulses import tabulated_pulse

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


class OutputDir:
    """Single writer for one run: every file goes through here and is listed in the manifest."""

    def __init__(self, path: Path) -> None:
        self.path = Path(path)
        self.path.mkdir(parents=True, exist_ok=True)
        self.written: list[str] = []

    def _record(self, target: Path) -> Path:
        self.written.append(target.name)
        logger.info("Wrote %s", target)
        return target

    def write_csv(self, name: str, schema: str, rows: Iterable[list[str]]) -> Path:
        target = self.path / name
        with open(target, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_SCHEMAS[schema])
            writer.writerows(rows)
        return self._record(target)

    def write_json(self, name: str, payload: dict) -> Path:
        target = self.path / name
        target.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n", encoding="utf-8")
        return self._record(target)

    def write_text(self, name: str, text: str) -> Path:
        target = self.path / name
        target.write_text(text, encoding="utf-8")
        return self._record(target)

    def write_pulse(self, name: str, pulse: Pulse) -> Path:
        return self._record(save_pulse(pulse, self.path / name))

    def write_manifest(self, manifest: RunManifest) -> Path:
        """Written last; lists every other file of the run."""
        manifest.outputs = list(self.written)
        target = self.path / MANIFEST_NAME
        target.write_text(json.dumps(dataclasses.asdict(manifest), indent=2) + "\n", encoding="utf-8")
        logger.info("Wrote %s", target)
        return target


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path} is empty")
    return rows[0], rows[1:]


def read_manifest(path: Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def save_pulse(pulse: Pulse, path: Path) -> Path:
    path = Path(path)
    path.write_text(format_pulse(pulse), encoding="utf-8")
    return path


def load_pulse(path: Path) -> Pulse:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read pulse file {path}: {exc}") from exc
    T, samples, provenance = parse_pulse(text)
    return tabulated_pulse(samples, T, provenance)
