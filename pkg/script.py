"""Input scripts and the pump idle source that feeds them.

One event per line, `#` starts a comment, times never decrease:

    0   resize w1 316 262
    40  mouse_down 50 30
    60  mouse_up 50 30
    80  dbl_click 50 30
    90  key_down 37
    95  char 97
    120 close w1
    200 tick
"""

from __future__ import annotations

import sys
from typing import Iterable, Iterator, TextIO

import structlog

from display import InputEvent, InputKind
from errors import FrameworkError, ScriptError
from messages import WM_CLOSE

log = structlog.get_logger(__name__)

# kind -> (argument names, takes a target window)
GRAMMAR = {
    InputKind.RESIZE: (("width", "height"), True),
    InputKind.CLOSE: ((), True),
    InputKind.MOUSE_MOVE: (("x", "y"), False),
    InputKind.MOUSE_DOWN: (("x", "y"), False),
    InputKind.MOUSE_UP: (("x", "y"), False),
    InputKind.DBL_CLICK: (("x", "y"), False),
    InputKind.KEY_DOWN: (("code",), False),
    InputKind.CHAR: (("code",), False),
    InputKind.TICK: ((), False),
}


def parse_line(line, line_no, not_before=0) -> InputEvent | None:
    """One script line; None for blank and comment lines."""
    fields = line.split("#", 1)[0].split()
    if not fields:
        return None
    if len(fields) < 2:
        raise ScriptError(line_no, f"expected '<at_ms> <kind> ...', got {line.strip()!r}")
    try:
        at_ms = int(fields[0])
    except ValueError:
        raise ScriptError(line_no, f"bad time {fields[0]!r}") from None
    if at_ms < not_before:
        raise ScriptError(line_no, f"time {at_ms} is before {not_before}")
    try:
        kind = InputKind(fields[1])
    except ValueError:
        known = ", ".join(k.value for k in InputKind)
        raise ScriptError(line_no, f"unknown event {fields[1]!r} (known: {known})") from None
    names, targeted = GRAMMAR[kind]
    rest = fields[2:]
    target = None
    if targeted:
        if not rest:
            raise ScriptError(line_no, f"{kind.value} needs a window name")
        target, rest = rest[0], rest[1:]
    if len(rest) != len(names):
        raise ScriptError(line_no, f"{kind.value} takes {len(names)} argument(s): {' '.join(names) or 'none'}")
    try:
        args = tuple(int(a) for a in rest)
    except ValueError:
        raise ScriptError(line_no, f"{kind.value} arguments must be integers") from None
    if kind is InputKind.RESIZE and min(args) < 0:
        raise ScriptError(line_no, f"resize needs a non-negative size, got {args[0]}x{args[1]}")
    return InputEvent(at_ms, kind, target, args, line_no=line_no)


def parse_script(text, source="<script>") -> list[InputEvent]:
    events = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        ev = parse_line(line, line_no, events[-1].at_ms if events else 0)
        if ev is not None:
            events.append(ev)
    log.info("script_loaded", source=source, events=len(events))
    return events


def load_script(path) -> list[InputEvent]:
    with open(path) as f:
        return parse_script(f.read(), source=str(path))


def terminal_events(stream: TextIO = sys.stdin, out: TextIO = sys.stdout) -> Iterator[InputEvent]:
    """Script lines typed at a terminal; bad lines are reported and skipped."""
    last = 0
    for line_no, line in enumerate(stream, start=1):
        try:
            ev = parse_line(line, line_no, last)
        except ScriptError as exc:
            print(f"⚠️ {exc}", file=out, flush=True)
            continue
        if ev is not None:
            last = ev.at_ms
            yield ev


class ScriptFeeder:
    """Pump idle source: inject the next event, step the clock to the next
    timer, run the clock to `max_ms`, then close the main window, then quit."""

    def __init__(self, events: Iterable[InputEvent], max_ms, echo: TextIO | None = None, strict=True):
        self._events = iter(events)
        self._next: InputEvent | None = None
        self._exhausted = False
        self.max_ms = max_ms
        self.echo = echo
        self._echoed = 0
        self._closed = False
        self._quit = False
        self.injected = 0
        self.strict = strict
        self.error: ScriptError | None = None

    def _peek(self):
        if self._next is None and not self._exhausted:
            self._next = next(self._events, None)
            self._exhausted = self._next is None
        return self._next

    def _echo_trace(self, display):
        if self.echo is None:
            return
        lines = display.trace.lines(self._echoed)
        for line in lines:
            print(line, file=self.echo, flush=True)
        self._echoed += len(lines)

    def _rejected(self, display, ev, exc):
        """Strict runs stop feeding at the first event the display refuses and
        go straight to closing; otherwise the event is reported and skipped."""
        err = ScriptError(ev.line_no or 0, f"{ev}: {exc}")
        if not self.strict:
            log.warning("input_rejected", input_event=str(ev), error=str(exc))
            if self.echo is not None:
                print(f"⚠️ {err}", file=self.echo, flush=True)
            return
        log.error("input_rejected", input_event=str(ev), error=str(exc), line_no=ev.line_no)
        self.error = self.error or err
        self._events = iter(())
        self._exhausted = True
        self.max_ms = display.now_ms

    def __call__(self, display) -> bool:
        self._echo_trace(display)
        ev = self._peek()
        target = ev.at_ms if ev is not None else max(self.max_ms, display.now_ms)
        due = display.next_timer_due()
        if due is not None and due < target:
            display.advance_to(due)
            return True
        if ev is not None:
            self._next = None
            try:
                display.inject(ev)
            except FrameworkError as exc:
                self._rejected(display, ev, exc)
            else:
                self.injected += 1
            return True
        if display.now_ms < target:
            display.advance_to(target)
            return True
        if not self._closed:
            self._closed = True
            main = display.main_window
            if main is not None and display.is_live(main):
                display.post(main, WM_CLOSE())
                return True
        if not self._quit:
            self._quit = True
            log.info("forcing_quit", clock_ms=display.now_ms)
            display.post_quit(0)
            return True
        return False
