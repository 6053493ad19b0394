import threading

import pytest

import cml
import display as display_mod
import window
from display import Display
from messages import WM_DESTROY
from resources import Manifest
from run import Instance

MANIFEST_TEXT = """\
bitmap smlnj.bmp 158 131
icon   logo.ico  32 32
cursor busy.cur  32 32
menu   app_menu  1=Open 2=Save_As 3=Exit
"""


@pytest.fixture
def display():
    d = Display(Manifest.parse(MANIFEST_TEXT))
    previous = display_mod.activate(d)
    yield d
    display_mod.activate(previous)


@pytest.fixture
def instance(display):
    return Instance(display)


@pytest.fixture
def recorder():
    """Factory for handlers that log every message they receive, pass it to
    default processing, and stop after WM_DESTROY."""

    def make(log=None, on_message=None):
        log = [] if log is None else log

        def handler(w, ch):
            while True:
                m = cml.recv(ch)
                log.append(m)
                if on_message is not None:
                    on_message(w, m)
                window.default(w, m)
                if isinstance(m, WM_DESTROY):
                    return

        handler.log = log
        return handler

    return make


@pytest.fixture
def plain_class(instance):
    c = window.window_class("Plain", instance, None, None, None, [])
    yield c


def drain(display, events=(), until_ms=None):
    """Pump until the given input is injected, the clock reaches `until_ms`
    and nothing is left to deliver; returns the pump's exit code."""
    pending = iter(events)

    def idle(d):
        ev = next(pending, None)
        if ev is not None:
            d.inject(ev)
            return True
        if until_ms is not None and d.now_ms < until_ms:
            d.advance_to(until_ms)
            return True
        d.post_quit(0)
        return True

    display.idle = idle
    try:
        return display.pump_until_quit()
    finally:
        display.idle = None


def in_thread(fn, *args, timeout=5.0):
    """Run `fn` on a daemon thread; returns (finished, result)."""
    box = {}

    def body():
        box["result"] = fn(*args)

    t = threading.Thread(target=body, daemon=True)
    t.start()
    t.join(timeout)
    return not t.is_alive(), box.get("result")


def still_blocked(fn, *args, wait=0.2):
    finished, _ = in_thread(fn, *args, timeout=wait)
    return not finished
