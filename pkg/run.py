"""Application entry point and demo registry."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Callable, TypeVar

import structlog

import bounce
import buttons
import cml
import config
import display as display_mod
import notepad
from display import Display
from resources import Manifest

log = structlog.get_logger(__name__)

R = TypeVar("R")


@dataclass(frozen=True)
class Instance:
    """Application handle passed to winmain."""

    display: Display

    @property
    def manifest(self):
        return self.display.manifest


DEMOS: dict[str, Callable[[Instance], int]] = {
    "bounce": bounce.winmain,
    "buttons": buttons.winmain,
    "notepad": notepad.winmain,
}


def make_display(manifest=None) -> Display:
    if not isinstance(manifest, Manifest):
        manifest = Manifest.load(manifest or config.DEFAULT_MANIFEST)
    return Display(manifest)


def doit(main: Callable[[Instance], R], *, manifest=None, seed=None, display=None) -> R:
    """Run `main` with a fresh instance on an activated display and return
    its result once the display's threads have drained."""
    if seed is not None:
        cml.seed(seed)
    if display is None:
        display = make_display(manifest)
    previous = display_mod.activate(display)
    try:
        return main(Instance(display))
    finally:
        display.settle(timeout=config.STALL_THRESHOLD_S)
        display_mod.activate(previous)


# ================= JSON =================

def save_json(file, data):
    with open(file, "w") as f:
        json.dump(data, f, indent=2)


def summarize(demo, exit_code, display: Display) -> dict:
    frame = display.trace.to_frame()
    counts = frame["op"].value_counts().sort_index()
    return {
        "demo": demo,
        "exit_code": exit_code,
        "clock_ms": display.now_ms,
        "records": len(frame),
        "ops": {op: int(n) for op, n in counts.items()},
        "windows": int(frame["window"].nunique()),
        "digest": hashlib.sha256(display.trace.text().encode()).hexdigest(),
    }
