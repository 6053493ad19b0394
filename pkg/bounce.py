"""Bouncing logo demo: a timer-driven handler that blits a bitmap around
its window's client area, turning back at the walls."""

from __future__ import annotations

from dataclasses import dataclass, replace

import structlog

import cml
import resources
import window
from messages import CS_HREDRAW, CS_VREDRAW, WM_CREATE, WM_DESTROY, WM_SIZE, WM_TIMER, WS_OVERLAPPEDWINDOW

log = structlog.get_logger(__name__)

# ================= CONFIG =================

TIMER_ID = 1
RATE = 20
MOVE_R = 10
X_TOTAL = 158
Y_TOTAL = 131
X_RADIUS = 59
Y_RADIUS = 45
BITMAP = "smlnj.bmp"
CLASS_NAME = "BouncingSMLN"
TITLE = "Bouncing SML/NJ"


@dataclass(frozen=True)
class BounceState:
    xs: int = 0
    ys: int = 0
    xc: int = 0
    yc: int = 0
    xm: int = 0
    ym: int = 0
    bitmap: resources.Bitmap | None = None


def compute_args(x, y, bitmap) -> BounceState:
    """Recenter on a new client size."""
    return BounceState(x, y, x // 2, y // 2, MOVE_R, MOVE_R, bitmap)


def step(s: BounceState) -> BounceState:
    """Move the center and turn back on a wall."""
    xc, yc = s.xc + s.xm, s.yc + s.ym
    xm = -s.xm if xc + X_RADIUS >= s.xs or xc - X_RADIUS <= 0 else s.xm
    ym = -s.ym if yc + Y_RADIUS >= s.ys or yc - Y_RADIUS <= 0 else s.ym
    return replace(s, xc=xc, yc=yc, xm=xm, ym=ym)


def on_timer(w: window.Window, s: BounceState) -> BounceState:
    """Draw at the current center, then move."""
    hdc = resources.dc_get(w)
    mem = resources.dc_create_compatible(hdc)
    resources.bitmap_select(mem, s.bitmap)
    resources.dc_bitblt(
        hdc, s.xc - X_TOTAL // 2, s.yc - Y_TOTAL // 2, X_TOTAL, Y_TOTAL,
        mem, 0, 0, resources.SRCCOPY,
    )
    resources.dc_release(w, hdc)
    resources.dc_delete(mem)
    return step(s)


def bounce(w: window.Window, ch: cml.Channel):
    while not isinstance(cml.recv(ch), WM_CREATE):
        pass
    window.set_timer(w, TIMER_ID, RATE)
    s = BounceState(bitmap=resources.bitmap_load(BITMAP))
    while True:
        m = cml.recv(ch)
        match m:
            case WM_SIZE(x, y):
                s = compute_args(x, y, s.bitmap)
            case WM_DESTROY():
                window.kill_timer(w, TIMER_ID)
                resources.bitmap_delete(s.bitmap)
                window.quit(0)
                return
            case WM_TIMER(t):
                if t == TIMER_ID:
                    s = on_timer(w, s)
            case _:
                window.default(w, m)


def winmain(instance) -> int:
    c = window.window_class(
        CLASS_NAME, instance, resources.ARROW, resources.APPLICATION, resources.WHITE,
        [CS_HREDRAW, CS_VREDRAW],
    )
    w = window.create(
        c, TITLE, [WS_OVERLAPPEDWINDOW], None, None, None, None, None, None, instance, bounce,
    )
    v = window.msg_loop(w)
    window.unregister(c)
    return v
