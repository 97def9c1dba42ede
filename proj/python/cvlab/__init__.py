"""Curvelet frame, cartoon models and experiment runners."""

import json

from . import _core
from ._core import (
    ConfigError,
    CvlabError,
    coefficient,
    commands,
    forward,
    mterm_errors,
    rasterize,
    round_trip,
)

__all__ = [
    "ConfigError",
    "CvlabError",
    "build_info",
    "coefficient",
    "commands",
    "default_config",
    "forward",
    "mterm_errors",
    "rasterize",
    "round_trip",
    "run",
]


def build_info():
    return json.loads(_core.build_info())


def default_config(command):
    return json.loads(_core.default_config(command))


def run(command, config=None, threads=1):
    """Runs a command and returns a dict with pass, summary, report and files."""
    text = json.dumps(config if config is not None else {})
    passed, summary, report, files = _core.run(command, text, threads)
    return {"pass": passed, "summary": summary, "report": json.loads(report), "files": dict(files)}
