# run_context.py
"""
RunContext owns one run directory: it creates it, records the run manifest, and keeps
every CSV stream open for the duration of the run.

Usage:
    with RunContext(cfg) as ctx:
        series = ctx.open_csv('series.csv', SERIES_COLUMNS)
        series.writerow({...})
        ctx.snapshot(state)
"""
from __future__ import annotations
import csv
from datetime import datetime
from logging import getLogger
from pathlib import Path
from typing import TYPE_CHECKING

from nematiq.config import OUTPUT_BASE_PATH, RUN_MANIFEST_NAME
from nematiq.util.export import snapshot_name, write_run_manifest, write_vtk_snapshot

if TYPE_CHECKING:
    from nematiq.util.config_file import ExperimentConfig

logger = getLogger(__name__)


class RunContext:
    """Single writer for one run directory; files are flushed and closed on exit."""

    def __init__(self, cfg: ExperimentConfig, output_dir: str | Path | None = None):
        self.cfg = cfg
        self.output_dir = Path(
            output_dir or cfg.output_dir or Path(OUTPUT_BASE_PATH) / cfg.experiment.value
        )
        self._files = None
        self._written = None
        self._started = None

    def __enter__(self):
        logger.debug(f"Entering RunContext for '{self.output_dir}'")
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self._started = datetime.now()
        self._files = {}
        self._written = []
        manifest = write_run_manifest(
            self.output_dir / RUN_MANIFEST_NAME, self.cfg.as_manifest(), self._started
        )
        self._written.append(manifest)
        logger.info(f"Run directory: {self.output_dir}")
        return self

    def _require_entered(self, attr):
        value = getattr(self, f'_{attr}')
        if value is None:
            raise RuntimeError("RunContext not entered - use 'with' statement")
        return value

    @property
    def started(self) -> datetime:
        return self._require_entered('started')

    @property
    def written(self) -> list[Path]:
        """Every file this run has produced so far, in creation order."""
        return list(self._require_entered('written'))

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def open_csv(self, name: str, columns) -> csv.DictWriter:
        files = self._require_entered('files')
        if name in files:
            raise ValueError(f"CSV stream '{name}' is already open")
        handle = open(self.path(name), 'w', newline='')
        files[name] = handle
        self._written.append(self.path(name))
        writer = csv.DictWriter(handle, fieldnames=list(columns))
        writer.writeheader()
        return writer

    def record(self, path: Path) -> Path:
        """Register a file written by someone else."""
        self._require_entered('written').append(Path(path))
        return Path(path)

    def snapshot(self, state) -> Path:
        self._require_entered('files')
        return self.record(write_vtk_snapshot(self.path(snapshot_name(state.t)), state))

    def __exit__(self, exc_type, exc_val, exc_tb):
        logger.debug(f"Exiting RunContext for '{self.output_dir}'")
        if exc_type:
            logger.debug(f"Exception occurred ({exc_type.__name__}), keeping partial outputs")
        try:
            for name, handle in (self._files or {}).items():
                logger.debug(f"Closing {name}")
                handle.close()
        finally:
            self._files = None
            self._started = None
        return False
