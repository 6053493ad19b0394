"""Window classes and windows.

Every window is served by its own handler thread instead of a per-class
window procedure. `create` spawns the handler with the new window and the
channel it receives messages on; WM_CREATE is always the first message on
that channel and WM_DESTROY the last.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import structlog

import cml
import config
import display as display_mod
from errors import RegistrationError, WindowError
from messages import SW_NORMAL, WS_CHILD, Msg, Rect, ShowStyle

log = structlog.get_logger(__name__)

Handler = Callable[["Window", cml.Channel], None]


@dataclass(eq=False)
class WindowClass:
    name: str
    cursor: object
    icon: object
    brush: object
    styles: frozenset
    display: object
    registered: bool = True
    system: bool = False


@dataclass(frozen=True)
class Window:
    """Handle on a window of a display."""

    display: object
    id: int
    name: str

    def _record(self):
        return self.display.record(self.id)

    @property
    def live(self):
        return self.display.is_live(self.id)

    @property
    def title(self):
        return self._record().title

    @property
    def class_name(self):
        return self._record().class_name

    @property
    def styles(self):
        return self._record().styles

    @property
    def shown(self):
        return self._record().shown

    @property
    def child_id(self):
        return self._record().child_id

    @property
    def parent(self):
        parent = self._record().parent
        return None if parent is None else handle(self.display, parent)

    @property
    def errored(self):
        return self._record().errored

    def __str__(self):
        return self.name


def handle(display, wid) -> Window:
    return Window(display, wid, display.record(wid).name)


# ================= CLASSES =================

def window_class(name, instance, cursor, icon, brush, styles, system=False) -> WindowClass:
    """Create and register a window class."""
    if not name:
        raise RegistrationError("class name must not be empty")
    c = WindowClass(name, cursor, icon, brush, frozenset(styles), instance.display, system=system)
    instance.display.register_class(name, c)
    return c


def unregister(c: WindowClass):
    if not c.registered:
        raise RegistrationError(f"class {c.name!r} is not registered")
    c.display.unregister_class(c.name)
    c.registered = False


# ================= CREATION =================

def _spawn_window(c, title, styles, parent, child_id, rect, menu, handler) -> Window:
    if not c.registered:
        raise RegistrationError(f"class {c.name!r} is not registered")
    display = c.display
    ch = cml.channel()
    rec = display.add_window(
        class_name=c.name,
        class_styles=c.styles,
        title=title,
        styles=styles,
        parent=parent,
        child_id=child_id,
        rect=rect,
        menu=menu,
        channel=ch,
    )
    w = Window(display, rec.id, rec.name)

    def body():
        try:
            handler(w, ch)
        except Exception as exc:
            display.handler_failed(w.id, exc)

    cml.spawn(body, name=f"{rec.name}.handler")
    return w


def create(c, title, styles, owner, x, y, width, height, menu, instance, handler: Handler) -> Window:
    """Create a top-level window. None for x, y, width or height picks a
    default: cascading positions, 640x480."""
    display = instance.display
    if owner is not None and not owner.live:
        raise WindowError(f"owner {owner.name} was destroyed")
    if x is None or y is None:
        k = display.next_cascade()
        x = config.CASCADE_STEP * k if x is None else x
        y = config.CASCADE_STEP * k if y is None else y
    width = config.DEFAULT_WIDTH if width is None else width
    height = config.DEFAULT_HEIGHT if height is None else height
    return _spawn_window(c, title, list(styles), None, None, Rect.of_size(x, y, width, height), menu, handler)


def create_child(c, title, styles, parent, x, y, width, height, child_id, reserved, instance,
                 handler: Handler) -> Window:
    """Create a child window; `child_id` must be unique among the parent's
    children. `reserved` is accepted and ignored."""
    parent_client = get_client_rect(parent)
    x = 0 if x is None else x
    y = 0 if y is None else y
    width = parent_client.width if width is None else width
    height = parent_client.height if height is None else height
    styles = list(styles)
    if WS_CHILD not in styles:
        styles.append(WS_CHILD)
    return _spawn_window(c, title, styles, parent.id, child_id, Rect.of_size(x, y, width, height),
                         None, handler)


# ================= OPERATIONS =================

def show(w: Window, style: ShowStyle = SW_NORMAL):
    w.display.show(w.id, style)


def update(w: Window):
    w.display.update(w.id)


def set_foreground(w: Window):
    w.display.set_foreground(w.id)


def move(w: Window, x: int, y: int):
    w.display.move(w.id, x, y)


def resize(w: Window, width: int, height: int):
    w.display.resize(w.id, width, height)


def get_client_rect(w: Window) -> Rect:
    return w.display.client_rect(w.id)


def get_window_rect(w: Window) -> Rect:
    """Rect in the coordinates of the window's parent (screen for top-level)."""
    return w.display.window_rect(w.id)


def invalidate(w: Window, rect: Rect | None = None):
    w.display.invalidate(w.id, rect)


def destroy(w: Window):
    w.display.destroy(w.id)


def send(w: Window, m: Msg):
    w.display.post(w.id, m)


def msg_loop(w: Window) -> int:
    return w.display.pump_until_quit(main=w.id)


def quit(exit_code: int):
    display_mod.current().post_quit(exit_code)


def default(w: Window, m: Msg):
    w.display.default_proc(w.id, m)


# ================= TIMERS =================

def set_timer(w: Window, timer_id: int, rate_ms: int, callback=None):
    w.display.set_timer(w.id, timer_id, rate_ms, callback)


def kill_timer(w: Window, timer_id: int):
    w.display.kill_timer(w.id, timer_id)
