"""Simulated window system.

A Display owns every piece of window-system state: the window registry and
z-order, the virtual clock and its timers, the system message queue, the
input routing rules and the draw-command trace. All mutations go through
the display lock, so the operations below may be called from any thread.

Each window gets a mailbox thread. The pump hands messages to the mailbox,
which never refuses one, and the mailbox forwards them in order to the
window's synchronous handler channel. A slow handler therefore only delays
its own window.
"""

from __future__ import annotations

import itertools
import threading
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, ClassVar

import pandas as pd
import structlog

import cml
import config
from errors import ClockError, FrameworkError, MessageError, PumpError, RegistrationError, TimerError, WindowError
from messages import (
    CS_HREDRAW,
    CS_VREDRAW,
    SW_HIDE,
    WM_CHAR,
    WM_CLOSE,
    WM_CREATE,
    WM_DESTROY,
    WM_KEYDOWN,
    WM_LBUTTONDBLCLK,
    WM_LBUTTONDOWN,
    WM_LBUTTONUP,
    WM_MOUSEMOVE,
    WM_PAINT,
    WM_QUIT,
    WM_SIZE,
    WM_TIMER,
    WS_VISIBLE,
    Msg,
    Rect,
    ShowStyle,
    rect_contains,
    rect_intersect,
)

log = structlog.get_logger(__name__)


# ================= TRACE =================

@dataclass(frozen=True)
class DrawCmd:
    op: ClassVar[str] = ""
    window: str


@dataclass(frozen=True)
class FillRect(DrawCmd):
    op: ClassVar[str] = "FILLRECT"
    rect: Rect
    brush: str

    def __str__(self):
        return f"FILLRECT {self.window} {self.rect} {self.brush}"


@dataclass(frozen=True)
class BitBlt(DrawCmd):
    op: ClassVar[str] = "BITBLT"
    x: int
    y: int
    width: int
    height: int
    bitmap: str
    src_x: int
    src_y: int
    rop: str

    def __str__(self):
        return (
            f"BITBLT {self.window} {self.x} {self.y} {self.width} {self.height} "
            f"{self.bitmap} {self.src_x} {self.src_y} {self.rop}"
        )


@dataclass(frozen=True)
class DrawIcon(DrawCmd):
    op: ClassVar[str] = "DRAWICON"
    x: int
    y: int
    icon: str

    def __str__(self):
        return f"DRAWICON {self.window} {self.x} {self.y} {self.icon}"


@dataclass(frozen=True)
class ValidateRect(DrawCmd):
    op: ClassVar[str] = "VALIDATERECT"
    rect: Rect

    def __str__(self):
        return f"VALIDATERECT {self.window} {self.rect}"


@dataclass(frozen=True)
class Label(DrawCmd):
    """Caption text painted by a control."""

    op: ClassVar[str] = "LABEL"
    text: str

    def __str__(self):
        return f"LABEL {self.window} {self.text}"


@dataclass(frozen=True)
class Notify(DrawCmd):
    op: ClassVar[str] = "NOTIFY"
    code: str

    def __str__(self):
        return f"NOTIFY {self.window} {self.code}"


@dataclass(frozen=True)
class HandlerError(DrawCmd):
    op: ClassVar[str] = "ERROR"
    error: str

    def __str__(self):
        return f"ERROR {self.window} {self.error}"


class Trace:
    """Append-only log of draw commands and notifications."""

    def __init__(self):
        self._lock = threading.Lock()
        self._records: list[DrawCmd] = []

    def append(self, record: DrawCmd):
        with self._lock:
            self._records.append(record)

    def records(self, start=0):
        with self._lock:
            return self._records[start:]

    def lines(self, start=0):
        return [str(r) for r in self.records(start)]

    def text(self):
        return "".join(line + "\n" for line in self.lines())

    def write(self, path):
        with open(path, "w") as f:
            f.write(self.text())

    def to_frame(self):
        return pd.DataFrame(
            [{"op": r.op, "window": r.window, "record": str(r)} for r in self.records()],
            columns=["op", "window", "record"],
        )

    def __len__(self):
        with self._lock:
            return len(self._records)


# ================= INPUT =================

class InputKind(Enum):
    MOUSE_MOVE = "mouse_move"
    MOUSE_DOWN = "mouse_down"
    MOUSE_UP = "mouse_up"
    DBL_CLICK = "dbl_click"
    KEY_DOWN = "key_down"
    CHAR = "char"
    CLOSE = "close"
    RESIZE = "resize"
    TICK = "tick"


@dataclass(frozen=True)
class InputEvent:
    at_ms: int
    kind: InputKind
    target: str | None = None
    args: tuple = ()
    # script line the event came from
    line_no: int | None = field(default=None, compare=False)

    def __str__(self):
        parts = [str(self.at_ms), self.kind.value]
        if self.target is not None:
            parts.append(self.target)
        parts.extend(str(a) for a in self.args)
        return " ".join(parts)


# ================= STATE =================

@dataclass
class TimerRecord:
    window: int
    timer_id: int
    period_ms: int
    next_due_ms: int


@dataclass(eq=False)
class WindowRecord:
    id: int
    name: str
    class_name: str
    class_styles: frozenset
    title: str
    styles: frozenset
    parent: int | None
    child_id: int | None
    rect: Rect
    menu: Any
    inbox: cml.Channel
    shown: bool = False
    children: list = field(default_factory=list)
    invalid: Rect | None = None
    errored: bool = False
    mailbox_open: bool = True

    @property
    def top_level(self):
        return self.parent is None


# pushed by Display.destroy after the real WM_DESTROY; never reaches a handler
_MAILBOX_CLOSED = object()


def _check_not_system(m):
    if isinstance(m, (WM_CREATE, WM_DESTROY)):
        raise MessageError(f"{m} is generated by the system and cannot be posted")


def _mailbox(inbox, outbox):
    """Accept from the pump at any time, forward to the handler in order."""
    pending = deque()
    while True:
        if not pending:
            pending.append(cml.recv(inbox))
            continue
        if pending[0] is _MAILBOX_CLOSED:
            return
        tag, m = cml.select([
            cml.wrap(cml.recv_evt(inbox), lambda m: ("in", m)),
            cml.wrap(cml.send_evt(outbox, pending[0]), lambda _: ("out", None)),
        ])
        if tag == "in":
            pending.append(m)
        else:
            pending.popleft()


# ================= ACTIVE DISPLAY =================

_current: Display | None = None


def current() -> "Display":
    if _current is None:
        raise FrameworkError("no active display")
    return _current


def activate(display):
    """Make `display` the one resource lookups use; returns the previous."""
    global _current
    previous, _current = _current, display
    return previous


# ================= DISPLAY =================

class Display:

    def __init__(self, manifest=None):
        self._cond = threading.Condition(threading.RLock())
        self.clock = cml.VirtualClock(cml.kernel())
        self.manifest = manifest
        self.trace = Trace()
        # most recent deliveries, oldest dropped first
        self.deliveries: deque[tuple[str, Msg]] = deque(maxlen=config.DELIVERY_LOG_SIZE)
        self.deliveries: list[tuple[str, Msg]] = []
        self.idle: Callable[[Display], bool] | None = None
        self.main_window: int | None = None

        self._ids = itertools.count(1)
        self._windows: dict[int, WindowRecord] = {}
        self._by_name: dict[str, int] = {}
        self._zorder: list[int] = []
        self._classes: dict[str, Any] = {}
        self._timers: dict[tuple[int, int], TimerRecord] = {}
        self._queue: deque = deque()
        self._quit_posted = False
        self._pumping = False
        self._cascade = 0
        self._capture: int | None = None
        self._keyboard: int | None = None
        self._forwarders: dict[int, Callable] = {}
        self._dcs: set = set()

    # ---------- registry ----------

    @property
    def now_ms(self):
        return self.clock.now_ms

    def register_class(self, name, cls):
        with self._cond:
            if name in self._classes:
                raise RegistrationError(f"class {name!r} already registered")
            self._classes[name] = cls

    def unregister_class(self, name):
        with self._cond:
            if name not in self._classes:
                raise RegistrationError(f"class {name!r} is not registered")
            live = [r.name for r in self._windows.values() if r.class_name == name]
            if live:
                raise RegistrationError(f"class {name!r} still has live windows {live}")
            del self._classes[name]

    def lookup_class(self, name):
        with self._cond:
            return self._classes.get(name)

    def registered_classes(self, include_system=False):
        with self._cond:
            return [
                n for n, c in self._classes.items()
                if include_system or not getattr(c, "system", False)
            ]

    def next_cascade(self):
        with self._cond:
            k, self._cascade = self._cascade, self._cascade + 1
            return k

    def add_window(self, *, class_name, class_styles, title, styles, parent, child_id,
                   rect, menu, channel) -> WindowRecord:
        """Register a window, start its mailbox and hand it WM_CREATE."""
        with self._cond:
            if class_name not in self._classes:
                raise RegistrationError(f"class {class_name!r} is not registered")
            if parent is not None:
                siblings = self.record(parent).children
                if any(self._windows[s].child_id == child_id for s in siblings):
                    raise WindowError(f"child id {child_id} already used under {self._windows[parent].name}")
            wid = next(self._ids)
            rec = WindowRecord(
                id=wid,
                name=f"w{wid}",
                class_name=class_name,
                class_styles=frozenset(class_styles),
                title=title,
                styles=frozenset(styles),
                parent=parent,
                child_id=child_id,
                rect=rect,
                menu=menu,
                inbox=cml.channel(f"w{wid}.inbox"),
            )
            self._windows[wid] = rec
            self._by_name[rec.name] = wid
            if parent is not None:
                self._windows[parent].children.append(wid)
            cml.spawn(lambda: _mailbox(rec.inbox, channel), name=f"{rec.name}.mailbox")
            self._push(rec, WM_CREATE())
            if parent is not None and WS_VISIBLE in rec.styles:
                rec.shown = True
                self._invalidate(rec, None)
            log.debug("window_created", window=rec.name, cls=class_name, parent=parent)
            return rec

    def record(self, wid) -> WindowRecord:
        with self._cond:
            rec = self._windows.get(wid)
            if rec is None:
                raise WindowError(f"window {wid} does not exist")
            return rec

    def is_live(self, wid):
        with self._cond:
            return wid in self._windows

    def window_by_name(self, name) -> int:
        with self._cond:
            wid = self._by_name.get(name)
            if wid is None or wid not in self._windows:
                raise WindowError(f"no live window named {name!r}")
            return wid

    def live_windows(self):
        with self._cond:
            return [r.name for r in self._windows.values()]

    def zorder(self):
        with self._cond:
            return [self._windows[w].name for w in self._zorder]

    def set_forwarder(self, wid, forwarder):
        with self._cond:
            self._forwarders[wid] = forwarder

    def _forwarder(self, wid, forward):
        if not forward:
            return None
        with self._cond:
            return self._forwarders.get(wid)

    # ---------- geometry ----------

    def window_rect(self, wid) -> Rect:
        return self.record(wid).rect

    def client_rect(self, wid) -> Rect:
        return self.record(wid).rect.client()

    def screen_rect(self, wid) -> Rect:
        with self._cond:
            rec = self.record(wid)
            rect = rec.rect
            while rec.parent is not None:
                rec = self._windows[rec.parent]
                rect = rect.translate(rec.rect.left, rec.rect.top)
            return rect

    def move(self, wid, x, y, forward=True):
        fwd = self._forwarder(wid, forward)
        if fwd is not None:
            return fwd("move", x, y)
        with self._cond:
            rec = self.record(wid)
            rec.rect = rec.rect.moved_to(x, y)

    def resize(self, wid, width, height, forward=True):
        fwd = self._forwarder(wid, forward)
        if fwd is not None:
            return fwd("resize", width, height)
        if width < 0 or height < 0:
            raise WindowError(f"window size must be non-negative, got {width}x{height}")
        with self._cond:
            rec = self.record(wid)
            rec.rect = rec.rect.resized(width, height)
            self._enqueue(wid, WM_SIZE(width, height))
            if rec.class_styles & {CS_HREDRAW, CS_VREDRAW}:
                self._invalidate(rec, None)

    def show(self, wid, style: ShowStyle, forward=True):
        fwd = self._forwarder(wid, forward)
        if fwd is not None:
            return fwd("show", style)
        with self._cond:
            rec = self.record(wid)
            if rec.top_level and wid in self._zorder:
                self._zorder.remove(wid)
            if style is SW_HIDE:
                rec.shown = False
                return
            rec.shown = True
            if rec.top_level:
                self._zorder.insert(0, wid)
            self._invalidate_tree(rec)

    def set_foreground(self, wid):
        with self._cond:
            rec = self.record(wid)
            while rec.parent is not None:
                rec = self._windows[rec.parent]
            if rec.id in self._zorder:
                self._zorder.remove(rec.id)
            rec.shown = True
            self._zorder.insert(0, rec.id)

    def invalidate(self, wid, rect=None):
        with self._cond:
            self._invalidate(self.record(wid), rect)

    def _invalidate(self, rec, rect):
        client = rec.rect.client()
        area = client if rect is None else rect_intersect(rect, client)
        if area is None or area.empty:
            return
        rec.invalid = area if rec.invalid is None else rec.invalid.union(area)
        self._cond.notify_all()

    def _invalidate_tree(self, rec):
        self._invalidate(rec, None)
        for cid in rec.children:
            child = self._windows[cid]
            if child.shown:
                self._invalidate_tree(child)

    def update(self, wid):
        with self._cond:
            rec = self.record(wid)
            if rec.invalid is not None:
                invalid, rec.invalid = rec.invalid, None
                self._push(rec, WM_PAINT(invalid))

    def destroy(self, wid, forward=True):
        fwd = self._forwarder(wid, forward)
        if fwd is not None:
            return fwd("destroy")
        with self._cond:
            rec = self._windows.get(wid)
            if rec is None:
                return
            for cid in list(rec.children):
                self.destroy(cid, forward=False)
            del self._windows[wid]
            self._by_name.pop(rec.name, None)
            if wid in self._zorder:
                self._zorder.remove(wid)
            if rec.parent is not None and rec.parent in self._windows:
                self._windows[rec.parent].children.remove(wid)
            for key in [k for k in self._timers if k[0] == wid]:
                del self._timers[key]
            if self._capture == wid:
                self._capture = None
            if self._keyboard == wid:
                self._keyboard = None
            self._forwarders.pop(wid, None)
            self._push(rec, WM_DESTROY())
            cml.send(rec.inbox, _MAILBOX_CLOSED)
            rec.mailbox_open = False
            log.debug("window_destroyed", window=rec.name)

    # ---------- messages ----------

    def post(self, wid, m: Msg):
        if isinstance(m, WM_QUIT):
            return self.post_quit(m.exit_code)
        _check_not_system(m)
        with self._cond:
            self.record(wid)
            self._enqueue(wid, m)

    def _enqueue(self, wid, m):
        self._queue.append((wid, m))
        self._cond.notify_all()

    def deliver_now(self, wid, m: Msg):
        """Hand `m` straight to the window's mailbox, ahead of anything still
        in the system queue (a sent rather than posted message)."""
        _check_not_system(m)
        with self._cond:
            self._push(self.record(wid), m)

    def _push(self, rec, m):
        # the mailbox always has a recv offered, so this send does not wait on
        # any thread that needs _cond
        if not rec.mailbox_open:
            raise WindowError(f"window {rec.name} is destroyed")
        self.deliveries.append((rec.name, m))
        cml.send(rec.inbox, m)

    def post_quit(self, exit_code: int):
        with self._cond:
            if self._quit_posted:
                return
            self._quit_posted = True
            self._queue.append((None, WM_QUIT(exit_code)))
            self._cond.notify_all()

    def default_proc(self, wid, m: Msg):
        if isinstance(m, WM_PAINT):
            with self._cond:
                rec = self._windows.get(wid)
                if rec is None:
                    return
                self.trace.append(ValidateRect(rec.name, m.invalid))
                if rec.invalid is not None and m.invalid.covers(rec.invalid):
                    rec.invalid = None
        elif isinstance(m, WM_CLOSE):
            self.destroy(wid)

    def handler_failed(self, wid, exc):
        with self._cond:
            rec = self._windows.get(wid)
            name = rec.name if rec is not None else f"w{wid}"
            if rec is not None:
                rec.errored = True
            self.trace.append(HandlerError(name, type(exc).__name__))
        log.error("handler_failed", window=name, error=repr(exc))

    # ---------- timers ----------

    def set_timer(self, wid, timer_id, period_ms, callback=None):
        if callback is not None:
            raise TimerError("timer callbacks are not supported")
        if period_ms <= 0:
            raise TimerError(f"timer period must be positive, got {period_ms}")
        with self._cond:
            self.record(wid)
            self._timers[(wid, timer_id)] = TimerRecord(
                wid, timer_id, period_ms, self.clock.now_ms + period_ms
            )

    def kill_timer(self, wid, timer_id):
        with self._cond:
            self._timers.pop((wid, timer_id), None)

    def next_timer_due(self):
        with self._cond:
            return min((t.next_due_ms for t in self._timers.values()), default=None)

    def advance_clock(self, delta_ms):
        if delta_ms < 0:
            raise ClockError(f"cannot advance by {delta_ms} ms")
        with self._cond:
            return self.advance_to(self.clock.now_ms + delta_ms)

    def advance_to(self, t_ms):
        with self._cond:
            if t_ms < self.clock.now_ms:
                raise ClockError(f"clock at {self.clock.now_ms} ms cannot go back to {t_ms} ms")
            fired = []
            for timer in self._timers.values():
                while timer.next_due_ms <= t_ms:
                    fired.append((timer.next_due_ms, timer.timer_id, timer.window))
                    timer.next_due_ms += timer.period_ms
            for _, timer_id, wid in sorted(fired):
                self._enqueue(wid, WM_TIMER(timer_id))
            return self.clock.advance_to(t_ms)

    def after_evt(self, delay_ms):
        """Event that commits `delay_ms` virtual milliseconds from now."""
        return cml.timeout_evt(self.clock.now_ms + delay_ms, self.clock)

    # ---------- input ----------

    def hit_test(self, x, y):
        """(window, client x, client y) of the deepest shown window under the
        screen point, searching top-level windows in z-order."""
        with self._cond:
            for top in self._zorder:
                rec = self._windows[top]
                if rect_contains(rec.rect, x, y):
                    return self._descend(rec, x - rec.rect.left, y - rec.rect.top)
            return None

    def _descend(self, rec, cx, cy):
        for cid in reversed(rec.children):
            child = self._windows[cid]
            if child.shown and rect_contains(child.rect, cx, cy):
                return self._descend(child, cx - child.rect.left, cy - child.rect.top)
        return rec.id, cx, cy

    def _relative_to(self, wid, x, y):
        origin = self.screen_rect(wid)
        return x - origin.left, y - origin.top

    def inject(self, ev: InputEvent):
        with self._cond:
            if ev.at_ms < self.clock.now_ms:
                raise ClockError(f"input at {ev.at_ms} ms is before the clock ({self.clock.now_ms} ms)")
            self.advance_to(ev.at_ms)
            kind = ev.kind
            if kind is InputKind.TICK:
                return
            if kind is InputKind.RESIZE:
                self.resize(self.window_by_name(ev.target), *ev.args)
            elif kind is InputKind.CLOSE:
                self.post(self.window_by_name(ev.target), WM_CLOSE())
            elif kind in (InputKind.KEY_DOWN, InputKind.CHAR):
                wid = self._keyboard if self._keyboard in self._windows else None
                if wid is None and self._zorder:
                    wid = self._zorder[0]
                if wid is None:
                    log.debug("input_dropped", input_event=str(ev))
                    return
                msg = WM_KEYDOWN(*ev.args) if kind is InputKind.KEY_DOWN else WM_CHAR(*ev.args)
                self._enqueue(wid, msg)
            else:
                self._route_mouse(ev)

    def _route_mouse(self, ev):
        x, y = ev.args
        if ev.kind in (InputKind.MOUSE_UP, InputKind.MOUSE_MOVE) and self._capture in self._windows:
            wid = self._capture
            cx, cy = self._relative_to(wid, x, y)
        else:
            hit = self.hit_test(x, y)
            if hit is None:
                log.debug("input_dropped", input_event=str(ev))
                if ev.kind is InputKind.MOUSE_UP:
                    self._capture = None
                return
            wid, cx, cy = hit
        if ev.kind is InputKind.MOUSE_DOWN:
            self._capture = wid
            self._keyboard = wid
            self._enqueue(wid, WM_LBUTTONDOWN(cx, cy))
        elif ev.kind is InputKind.MOUSE_UP:
            self._capture = None
            self._enqueue(wid, WM_LBUTTONUP(cx, cy))
        elif ev.kind is InputKind.DBL_CLICK:
            self._keyboard = wid
            self._enqueue(wid, WM_LBUTTONDBLCLK(cx, cy))
        else:
            self._enqueue(wid, WM_MOUSEMOVE(cx, cy))

    # ---------- pump ----------

    def settle(self, timeout=None):
        """Wait until every framework thread is blocked (or stalled)."""
        return cml.kernel().wait_quiescent(timeout=timeout)

    def pending_messages(self):
        with self._cond:
            return len(self._queue)

    def _next_item(self):
        if self._queue:
            return self._queue.popleft()
        for rec in self._windows.values():
            if rec.invalid is not None:
                invalid, rec.invalid = rec.invalid, None
                return rec.id, WM_PAINT(invalid)
        return None

    def _has_work(self):
        return bool(self._queue) or any(r.invalid is not None for r in self._windows.values())

    def pump_until_quit(self, main=None) -> int:
        """Dispatch the system queue until WM_QUIT; returns its exit code.

        Between deliveries the pump waits for handler threads to settle, so
        a given program and input produce the same trace every run. When the
        queue is empty it asks the idle source (if any) for more input."""
        with self._cond:
            if self._pumping:
                raise PumpError("a message loop is already running")
            self._pumping = True
            if main is not None:
                self.main_window = main
        try:
            while True:
                self.settle()
                with self._cond:
                    item = self._next_item()
                    if item is not None:
                        wid, m = item
                        if isinstance(m, WM_QUIT):
                            self._quit_posted = False
                            log.info("pump_quit", exit_code=m.exit_code, clock_ms=self.clock.now_ms)
                            return m.exit_code
                        rec = self._windows.get(wid)
                        if rec is not None:
                            self._push(rec, m)
                        continue
                if self.idle is not None and self.idle(self):
                    continue
                with self._cond:
                    while not self._has_work():
                        self._cond.wait()
        finally:
            with self._cond:
                self._pumping = False

    # ---------- device contexts ----------

    def dc_opened(self, dc):
        with self._cond:
            self._dcs.add(dc)

    def dc_closed(self, dc):
        with self._cond:
            self._dcs.discard(dc)

    def live_dcs(self):
        with self._cond:
            return len(self._dcs)

    def draw(self, record: DrawCmd):
        self.trace.append(record)
