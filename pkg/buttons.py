"""Composite control holding two push buttons, and a demo window around it.

The controller thread serves its own window's messages and, in the same
choice, the notification events of both buttons; a click on either is
reported as CLICKED n on the composite's notification channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import structlog

import cml
import resources
import window
from controls import ButtonNotify, Control, PushButton, free_child_id
from display import Notify
from errors import WindowError
from messages import CS_HREDRAW, CS_VREDRAW, WM_DESTROY, WS_CHILD, WS_OVERLAPPEDWINDOW, WS_VISIBLE

log = structlog.get_logger(__name__)

CLASS_NAME = "TwoButtons"
MAIN_CLASS_NAME = "TwoButtonDemo"
BUTTON_W = 80
BUTTON_H = 24
BUTTON_GAP = 20


@dataclass(frozen=True)
class CLICKED:
    button: int

    def __str__(self):
        return f"CLICKED {self.button}"


class TwoButtons:
    """Custom control: a child window with two push buttons in a row."""

    def __init__(self):
        self.notify_channel = cml.channel()
        self.window: window.Window | None = None
        self.buttons: tuple[PushButton, PushButton] | None = None

    @classmethod
    def create(cls, x, y, w, h, instance, parent, labels=("One", "Two"), child_id=None) -> "TwoButtons":
        if not parent.live:
            raise WindowError(f"parent {parent.name} was destroyed")
        c = instance.display.lookup_class(CLASS_NAME)
        if c is None:
            c = window.window_class(
                CLASS_NAME, instance, resources.ARROW, None, resources.WHITE,
                [CS_HREDRAW, CS_VREDRAW], system=True,
            )
        composite = cls()
        setup = cml.channel()

        def controller(win, ch):
            composite._run(win, ch, cml.recv(setup))

        if child_id is None:
            child_id = free_child_id(parent)
        composite.window = window.create_child(
            c, "", [WS_CHILD, WS_VISIBLE], parent, x, y, w, h, child_id, None, instance, controller,
        )
        b1 = PushButton.create(labels[0], 0, 0, BUTTON_W, BUTTON_H, instance, composite.window)
        b2 = PushButton.create(labels[1], BUTTON_W + BUTTON_GAP, 0, BUTTON_W, BUTTON_H, instance, composite.window)
        composite.buttons = (b1, b2)
        cml.send(setup, (b1, b2))
        return composite

    def _run(self, win, ch, buttons: tuple[Control, Control]):
        b1, b2 = buttons
        alive = True

        def handle_message(m):
            nonlocal alive
            match m:
                case WM_DESTROY():
                    alive = False
                case _:
                    window.default(win, m)

        def clicked(n):
            def on_notify(code):
                # double clicks are swallowed
                if code is ButtonNotify.BN_CLICKED:
                    win.display.draw(Notify(win.name, f"CLICKED {n}"))
                    cml.send(self.notify_channel, CLICKED(n))
            return on_notify

        while alive:
            cml.select([
                cml.wrap(cml.recv_evt(ch), handle_message),
                cml.wrap(b1.notify_evt(), clicked(1)),
                cml.wrap(b2.notify_evt(), clicked(2)),
            ])

    def notify_evt(self) -> cml.Event:
        return cml.recv_evt(self.notify_channel)

    def window_of(self) -> window.Window:
        return self.window


def two_button_demo(parent, instance=None, x=0, y=0):
    """Build the composite under `parent`; returns (control, notify event)."""
    from run import Instance

    instance = instance or Instance(parent.display)
    composite = TwoButtons.create(x, y, 2 * BUTTON_W + BUTTON_GAP, BUTTON_H, instance, parent)
    return composite, composite.notify_evt()


def winmain(instance) -> int:
    """Main window with the composite; every CLICKED is consumed by a
    listener thread so the controller never waits on it."""
    c = window.window_class(
        MAIN_CLASS_NAME, instance, resources.ARROW, resources.APPLICATION, resources.WHITE,
        [CS_HREDRAW, CS_VREDRAW],
    )

    def main_handler(w, ch):
        while True:
            m = cml.recv(ch)
            window.default(w, m)
            if isinstance(m, WM_DESTROY):
                window.quit(0)
                return

    w = window.create(c, "Two buttons", [WS_OVERLAPPEDWINDOW], None, 0, 0, 320, 120, None, instance, main_handler)
    window.show(w)
    composite, evt = two_button_demo(w, instance, 20, 20)

    def listener():
        while composite.window.live:
            log.info("composite_notify", notify=str(cml.sync(evt)))

    cml.spawn(listener, name="buttons.listener")
    v = window.msg_loop(w)
    window.unregister(c)
    return v
