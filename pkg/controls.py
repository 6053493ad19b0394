"""Predefined controls: PushButton and Edit.

A control is a child window that reports state changes on its own
notification channel instead of sending command messages to its parent's
handler. Each control sits inside a transparent wrapper window; the
control sends WM_COMMAND to the wrapper, and the wrapper's thread turns it
into a send on the notification channel. Window operations applied to the
control (move, resize, show, destroy) are forwarded so that wrapper and
control always cover the same screen area.

Composite controls (see buttons.py) follow the same contract: a `create`
classmethod, `notify_evt()` and `window_of()`.
"""

from __future__ import annotations

import itertools
import threading
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol, runtime_checkable

import structlog

import cml
import resources
import window
from display import Notify
from errors import WindowError
from messages import (
    CS_HREDRAW,
    CS_VREDRAW,
    WM_CHAR,
    WM_COMMAND,
    WM_DESTROY,
    WM_KEYDOWN,
    WM_LBUTTONDBLCLK,
    WM_LBUTTONDOWN,
    WM_LBUTTONUP,
    WM_PAINT,
    WS_CHILD,
    WS_VISIBLE,
    Rect,
)

log = structlog.get_logger(__name__)

BUTTON_CLASS = "BUTTON"
EDIT_CLASS = "EDIT"
WRAPPER_CLASS = "CONTROLWRAPPER"

VK_BACK = 8
VK_LEFT = 37
VK_RIGHT = 39
VK_DELETE = 46


class ButtonNotify(Enum):
    BN_CLICKED = "BN_CLICKED"
    BN_DOUBLECLICKED = "BN_DOUBLECLICKED"

    def __str__(self):
        return self.value


class EditNotify(Enum):
    # only EN_UPDATE and EN_CHANGE are ever emitted
    EN_CHANGE = "EN_CHANGE"
    EN_ERRSPACE = "EN_ERRSPACE"
    EN_HSCROLL = "EN_HSCROLL"
    EN_KILLFOCUS = "EN_KILLFOCUS"
    EN_MAXTEXT = "EN_MAXTEXT"
    EN_SETFOCUS = "EN_SETFOCUS"
    EN_UPDATE = "EN_UPDATE"
    EN_VSCROLL = "EN_VSCROLL"

    def __str__(self):
        return self.value


@runtime_checkable
class Control(Protocol):
    """What every control, predefined or composite, offers."""

    def notify_evt(self) -> cml.Event: ...

    def window_of(self) -> window.Window: ...


# ================= SYSTEM CLASSES =================

_class_lock = threading.Lock()


def _system_class(instance, name):
    """Window class shared by every control of a kind, registered on first use."""
    display = instance.display
    with _class_lock:
        c = display.lookup_class(name)
        if c is None:
            c = window.window_class(
                name, instance, resources.ARROW, None, resources.WHITE,
                [CS_HREDRAW, CS_VREDRAW], system=True,
            )
        return c


def free_child_id(parent):
    d = parent.display
    used = {d.record(c).child_id for c in d.record(parent.id).children}
    return next(i for i in itertools.count(1) if i not in used)


# ================= WRAPPER =================

def wrapper_forward(control: window.Window, op: str, *args):
    """Apply a window operation on a wrapped control to its wrapper too."""
    d = control.display
    wrapper = control.parent
    if wrapper is None:
        raise WindowError(f"{control.name} is not a wrapped control")
    match op:
        case "move":
            d.move(wrapper.id, *args, forward=False)
        case "resize":
            d.resize(wrapper.id, *args, forward=False)
            d.resize(control.id, *args, forward=False)
        case "show":
            d.show(wrapper.id, *args, forward=False)
            d.show(control.id, *args, forward=False)
        case "destroy":
            d.destroy(wrapper.id, forward=False)
        case _:
            raise ValueError(f"unknown window operation {op!r}")


def _wrapper_handler(codes: type[Enum], notify_ch: cml.Channel, control_name):
    """Turn WM_COMMAND from the control into notification-channel sends.

    Notifications wait in order until a consumer takes them, while the
    wrapper keeps serving its own messages; anything still pending when the
    wrapper is destroyed is dropped."""

    def handler(w, ch):
        pending = deque()
        while True:
            evs = [cml.wrap(cml.recv_evt(ch), lambda m: ("msg", m))]
            if pending:
                evs.append(cml.wrap(cml.send_evt(notify_ch, pending[0]), lambda _: ("sent", None)))
            tag, m = cml.select(evs)
            if tag == "sent":
                pending.popleft()
                continue
            match m:
                case WM_COMMAND(_, code):
                    w.display.draw(Notify(control_name(), code))
                    pending.append(codes[code])
                case WM_DESTROY():
                    if pending:
                        log.debug("notifications_dropped", window=w.name, count=len(pending))
                    return
                case _:
                    window.default(w, m)

    return handler


class WrappedControl:
    """A control window inside its transparent wrapper."""

    notify_codes: type[Enum]
    control_class: str

    def __init__(self):
        self.notify_channel = cml.channel()
        self.wrapper: window.Window | None = None
        self.control: window.Window | None = None

    def _build(self, title, x, y, w, h, instance, parent):
        if w <= 0 or h <= 0:
            raise WindowError(f"control size must be positive, got {w}x{h}")
        if not parent.live:
            raise WindowError(f"parent {parent.name} was destroyed")
        styles = [WS_CHILD, WS_VISIBLE]
        self.wrapper = window.create_child(
            _system_class(instance, WRAPPER_CLASS), "", styles, parent,
            x, y, w, h, free_child_id(parent), None, instance,
            _wrapper_handler(self.notify_codes, self.notify_channel, lambda: self.control.name),
        )
        self.control = window.create_child(
            _system_class(instance, self.control_class), title, styles, self.wrapper,
            0, 0, w, h, 1, None, instance, self._handle,
        )
        self.control.display.set_forwarder(
            self.control.id, lambda op, *args: wrapper_forward(self.control, op, *args)
        )

    def _handle(self, w, ch):
        raise NotImplementedError

    def _notify(self, code):
        """Send WM_COMMAND to the wrapper; a sent message, not a posted one."""
        try:
            self.control.display.deliver_now(self.wrapper.id, WM_COMMAND(self.control.child_id, code.value))
        except WindowError:
            log.debug("notify_after_destroy", control=self.control.name, code=code.value)

    def notify_evt(self) -> cml.Event:
        return cml.recv_evt(self.notify_channel)

    def window_of(self) -> window.Window:
        return self.control

    @property
    def rect(self) -> Rect:
        """The control's rect in its parent's client coordinates."""
        return window.get_window_rect(self.wrapper)

    def _paint(self, w, brush, text):
        dc = resources.dc_get(w)
        resources.dc_fill_rect(dc, window.get_client_rect(w), brush)
        resources.dc_text(dc, text)
        resources.dc_release(w, dc)


# ================= PUSH BUTTON =================

class PushButton(WrappedControl):
    notify_codes = ButtonNotify
    control_class = BUTTON_CLASS

    def __init__(self, label):
        super().__init__()
        self.label = label
        self.last_click_at: int | None = None
        self._pressed = False

    @classmethod
    def create(cls, label, x, y, w, h, instance, parent) -> "PushButton":
        b = cls(label)
        b._build(label, x, y, w, h, instance, parent)
        return b

    def _handle(self, w, ch):
        while True:
            m = cml.recv(ch)
            match m:
                case WM_LBUTTONDOWN():
                    self._pressed = True
                case WM_LBUTTONUP(x, y):
                    # leaving the button between down and up cancels the click
                    pressed, self._pressed = self._pressed, False
                    if pressed and window.get_client_rect(w).contains(x, y):
                        self.last_click_at = w.display.now_ms
                        self._notify(ButtonNotify.BN_CLICKED)
                case WM_LBUTTONDBLCLK():
                    self._pressed = False
                    self.last_click_at = w.display.now_ms
                    self._notify(ButtonNotify.BN_DOUBLECLICKED)
                case WM_PAINT():
                    self._paint(w, resources.GRAY, self.label)
                    window.default(w, m)
                case WM_DESTROY():
                    return
                case _:
                    window.default(w, m)


# ================= EDIT =================

@dataclass
class EditBuffer:
    """Text, selection and a single undo slot; no window involved."""

    text: str = ""
    sel: tuple[int, int] = (0, 0)
    undo_slot: tuple[str, tuple[int, int]] | None = field(default=None, repr=False)

    def set_sel(self, start, end):
        start, end = sorted((start, end))
        n = len(self.text)
        self.sel = (min(max(start, 0), n), min(max(end, 0), n))

    def replace_sel(self, s):
        start, end = self.sel
        self.undo_slot = (self.text, self.sel)
        self.text = self.text[:start] + s + self.text[end:]
        self.sel = (start + len(s), start + len(s))

    @property
    def can_undo(self):
        return self.undo_slot is not None

    def undo(self):
        """Swap the current state with the undo slot; a second undo redoes."""
        if self.undo_slot is None:
            return False
        current = (self.text, self.sel)
        self.text, self.sel = self.undo_slot
        self.undo_slot = current
        return True

    def empty_undo_buffer(self):
        self.undo_slot = None


class Edit(WrappedControl):
    notify_codes = EditNotify
    control_class = EDIT_CLASS

    def __init__(self, text0=""):
        super().__init__()
        self._lock = threading.Lock()
        self.buffer = EditBuffer(text0)

    @classmethod
    def create(cls, text0, x, y, w, h, instance, parent) -> "Edit":
        e = cls(text0)
        e._build(text0, x, y, w, h, instance, parent)
        return e

    @property
    def text(self):
        with self._lock:
            return self.buffer.text

    def get_sel(self):
        with self._lock:
            return self.buffer.sel

    def set_sel(self, start, end):
        with self._lock:
            self.buffer.set_sel(start, end)

    def replace_sel(self, s):
        with self._lock:
            self.buffer.replace_sel(s)
        self._changed()

    def can_undo(self):
        with self._lock:
            return self.buffer.can_undo

    def undo(self):
        with self._lock:
            undone = self.buffer.undo()
        if undone:
            self._changed()

    def empty_undo_buffer(self):
        with self._lock:
            self.buffer.empty_undo_buffer()

    def _changed(self):
        self._notify(EditNotify.EN_UPDATE)
        self._notify(EditNotify.EN_CHANGE)
        if self.control.live:
            window.invalidate(self.control)

    def _key(self, key_code):
        with self._lock:
            start, end = self.buffer.sel
            n = len(self.buffer.text)
            if key_code == VK_LEFT:
                pos = start if start != end else max(start - 1, 0)
                self.buffer.sel = (pos, pos)
                return
            if key_code == VK_RIGHT:
                pos = end if start != end else min(end + 1, n)
                self.buffer.sel = (pos, pos)
                return
            if key_code != VK_DELETE or (start == end == n):
                return
            if start == end:
                self.buffer.sel = (start, end + 1)
        self.replace_sel("")

    def _char(self, code_point):
        if code_point == VK_BACK:
            with self._lock:
                start, end = self.buffer.sel
                if start == end:
                    if start == 0:
                        return
                    self.buffer.sel = (start - 1, end)
            self.replace_sel("")
        else:
            self.replace_sel(chr(code_point))

    def _handle(self, w, ch):
        while True:
            m = cml.recv(ch)
            match m:
                case WM_CHAR(code_point):
                    self._char(code_point)
                case WM_KEYDOWN(key_code):
                    self._key(key_code)
                case WM_PAINT():
                    self._paint(w, resources.WHITE, self.text)
                    window.default(w, m)
                case WM_DESTROY():
                    return
                case _:
                    window.default(w, m)
