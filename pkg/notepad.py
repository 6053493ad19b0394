"""One-line notepad: a main window holding a single Edit control.

Typed characters reach the edit through the keyboard target (the last
window clicked, else the topmost window), so a script clicks into the
edit before typing.
"""

from __future__ import annotations

import structlog

import cml
import resources
import window
from controls import Edit, EditNotify
from messages import CS_HREDRAW, CS_VREDRAW, WM_DESTROY, WS_OVERLAPPEDWINDOW

log = structlog.get_logger(__name__)

CLASS_NAME = "Notepad"
INITIAL_TEXT = "hello world"


def winmain(instance) -> int:
    c = window.window_class(
        CLASS_NAME, instance, resources.ARROW, resources.APPLICATION, resources.WHITE,
        [CS_HREDRAW, CS_VREDRAW],
    )

    def main_handler(w, ch):
        while True:
            m = cml.recv(ch)
            window.default(w, m)
            if isinstance(m, WM_DESTROY):
                window.quit(0)
                return

    w = window.create(c, "Notepad", [WS_OVERLAPPEDWINDOW], None, 0, 0, 320, 80, None, instance, main_handler)
    window.show(w)
    edit = Edit.create(INITIAL_TEXT, 10, 10, 300, 24, instance, w)

    def listener():
        while edit.control.live:
            if cml.sync(edit.notify_evt()) is EditNotify.EN_CHANGE:
                log.info("edit_changed", text=edit.text, sel=edit.get_sel())

    cml.spawn(listener, name="notepad.listener")
    v = window.msg_loop(w)
    window.unregister(c)
    return v
