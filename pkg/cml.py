"""Concurrency kernel: lightweight threads, rendezvous channels and
first-class synchronous events.

An event describes a communication without performing it; `sync` performs
exactly one of the base communications the event offers:

    c = channel()
    spawn(lambda: send(c, 41))
    sync(wrap(recv_evt(c), lambda v: v + 1))    # 42

Synchronization is two-phase. The syncing thread first polls every base
event under the locks of the channels involved (taken in channel creation
order); if some are ready it commits one of them, picked uniformly at
random. Otherwise it enrolls one single-use commit token on every base
event and blocks; the first partner to claim the token commits and every
other enrollment is dead from then on, purged lazily.
"""

from __future__ import annotations

import heapq
import itertools
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Generic, Iterable, TypeVar

import numpy as np
import structlog

import config
from errors import ClockError, SpawnError

log = structlog.get_logger(__name__)

T = TypeVar("T")
A = TypeVar("A")
B = TypeVar("B")

_thread_ids = itertools.count(1)
_channel_ids = itertools.count()


# ================= THREADS =================

@dataclass(frozen=True)
class ThreadId:
    id: int
    name: str = field(default="", compare=False)

    def __str__(self):
        return f"thread-{self.id}"


class _ThreadState:
    """Scheduling state of one spawned thread, guarded by the kernel lock."""

    __slots__ = ("tid", "blocked", "since", "stalled")

    def __init__(self, tid):
        self.tid = tid
        self.blocked = False
        self.since = time.monotonic()
        self.stalled = False


class _Token:
    """Single-use commit token shared by all enrollments of one blocked sync."""

    __slots__ = ("_kernel", "_owner", "_done", "claimed", "index", "value")

    def __init__(self, kernel, owner):
        self._kernel = kernel
        self._owner = owner
        self._done = threading.Event()
        self.claimed = False
        self.index = None
        self.value = None

    def arm(self):
        with self._kernel._cond:
            if self._owner is not None:
                self._owner.blocked = True
                self._kernel._cond.notify_all()

    def claim(self):
        with self._kernel._cond:
            if self.claimed:
                return False
            self.claimed = True
            if self._owner is not None:
                self._owner.blocked = False
                self._owner.since = time.monotonic()
                self._owner.stalled = False
            return True

    def complete(self, index, value):
        self.index = index
        self.value = value
        self._done.set()

    def wait(self):
        self._done.wait()
        return self.index, self.value


@dataclass(frozen=True)
class _Enrollment:
    token: _Token
    index: int
    value: Any = None


# ================= CHANNELS =================

class Channel(Generic[T]):
    """Zero-capacity channel: a value moves only when a sender and a
    receiver commit together. Any number of threads may use either end."""

    __slots__ = ("index", "name", "_lock", "_senders", "_receivers")

    def __init__(self, name=""):
        self.index = next(_channel_ids)
        self.name = name
        self._lock = threading.Lock()
        self._senders: deque[_Enrollment] = deque()
        self._receivers: deque[_Enrollment] = deque()

    @property
    def blocked_senders(self):
        with self._lock:
            return sum(1 for e in self._senders if not e.token.claimed)

    @property
    def blocked_receivers(self):
        with self._lock:
            return sum(1 for e in self._receivers if not e.token.claimed)

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<Channel #{self.index}{label}>"


def _first_live(queue):
    while queue and queue[0].token.claimed:
        queue.popleft()
    return queue[0] if queue else None


# ================= EVENTS =================

class Event(Generic[T]):
    """A potential communication. Immutable; may be synchronized any number
    of times."""

    __slots__ = ()

    def wrap(self, f: Callable[[T], B]) -> "Event[B]":
        return WrappedEvent(self, f)


@dataclass(frozen=True, eq=False)
class SendEvent(Event[None]):
    channel: Channel
    value: Any


@dataclass(frozen=True, eq=False)
class RecvEvent(Event[T]):
    channel: Channel


@dataclass(frozen=True, eq=False)
class AlwaysEvent(Event[T]):
    value: Any = None


@dataclass(frozen=True, eq=False)
class NeverEvent(Event[T]):
    pass


@dataclass(frozen=True, eq=False)
class TimeoutEvent(Event[None]):
    deadline_ms: int
    clock: "VirtualClock"


@dataclass(frozen=True, eq=False)
class ChoiceEvent(Event[T]):
    events: tuple


@dataclass(frozen=True, eq=False)
class WrappedEvent(Event[B]):
    inner: Event
    f: Callable


def _flatten(event, wraps=(), out=None):
    """Base events of a tree, each with the wrap chain on its path
    (innermost function first)."""
    if out is None:
        out = []
    if isinstance(event, WrappedEvent):
        _flatten(event.inner, (event.f,) + wraps, out)
    elif isinstance(event, ChoiceEvent):
        for e in event.events:
            _flatten(e, wraps, out)
    elif isinstance(event, NeverEvent):
        pass
    elif isinstance(event, (SendEvent, RecvEvent, AlwaysEvent, TimeoutEvent)):
        out.append((event, wraps))
    else:
        raise TypeError(f"not an event: {event!r}")
    return out


# ================= VIRTUAL CLOCK =================

class VirtualClock:
    """Millisecond clock that moves only when advanced. Timeout events
    waiting on it commit when it reaches their deadline."""

    def __init__(self, kernel):
        self._kernel = kernel
        self._lock = threading.Lock()
        self._now = 0
        self._waiters = []
        self._seq = itertools.count()

    @property
    def now_ms(self):
        return self._now

    def advance(self, delta_ms):
        if delta_ms < 0:
            raise ClockError(f"cannot advance by {delta_ms} ms")
        return self.advance_to(self._now + delta_ms)

    def advance_to(self, t_ms):
        with self._lock:
            if t_ms < self._now:
                raise ClockError(f"clock at {self._now} ms cannot go back to {t_ms} ms")
            self._now = t_ms
            due = []
            while self._waiters and self._waiters[0][0] <= t_ms:
                due.append(heapq.heappop(self._waiters))
        for _, _, token, index in due:
            if token.claim():
                token.complete(index, None)
        return t_ms

    def _enroll(self, deadline_ms, token, index):
        with self._lock:
            if deadline_ms > self._now:
                heapq.heappush(self._waiters, (deadline_ms, next(self._seq), token, index))
                return
        if token.claim():
            token.complete(index, None)


# ================= KERNEL =================

class Kernel:
    """Thread registry, choice policy and synchronization protocol."""

    def __init__(self, seed=None):
        self._cond = threading.Condition()
        self._threads: dict[ThreadId, _ThreadState] = {}
        self._local = threading.local()
        self._rng_lock = threading.Lock()
        self._rng = np.random.default_rng(seed)
        self.clock = VirtualClock(self)

    def reseed(self, seed):
        with self._rng_lock:
            self._rng = np.random.default_rng(seed)

    def pick(self, k):
        with self._rng_lock:
            return int(self._rng.integers(k))

    # ---------- threads ----------

    def spawn(self, body: Callable[[], None], name=None) -> ThreadId:
        tid = ThreadId(next(_thread_ids), name or "")
        state = _ThreadState(tid)
        with self._cond:
            self._threads[tid] = state
        thread = threading.Thread(
            target=self._run, args=(body, state), name=name or str(tid), daemon=True
        )
        try:
            thread.start()
        except RuntimeError as exc:
            with self._cond:
                self._threads.pop(tid, None)
                self._cond.notify_all()
            raise SpawnError(f"cannot start {tid}: {exc}") from exc
        return tid

    def _run(self, body, state):
        self._local.state = state
        self._local.tid = state.tid
        try:
            body()
        except Exception:
            log.exception("thread_failed", tid=str(state.tid), name=state.tid.name)
        finally:
            with self._cond:
                self._threads.pop(state.tid, None)
                self._cond.notify_all()

    def get_tid(self) -> ThreadId:
        tid = getattr(self._local, "tid", None)
        if tid is None:
            tid = ThreadId(next(_thread_ids), threading.current_thread().name)
            self._local.tid = tid
        return tid

    @property
    def thread_count(self):
        with self._cond:
            return len(self._threads)

    def wait_quiescent(self, stall_s=None, timeout=None):
        """Block until every spawned thread is blocked in sync, or has been
        running longer than `stall_s` wall seconds. False on timeout."""
        stall_s = config.STALL_THRESHOLD_S if stall_s is None else stall_s
        give_up = None if timeout is None else time.monotonic() + timeout
        with self._cond:
            while True:
                now = time.monotonic()
                pending = []
                for state in self._threads.values():
                    if state.blocked:
                        continue
                    if now - state.since >= stall_s:
                        if not state.stalled:
                            state.stalled = True
                            log.warning("thread_stalled", tid=str(state.tid), name=state.tid.name)
                        continue
                    pending.append(state)
                if not pending:
                    return True
                wait = min(stall_s - (now - s.since) for s in pending)
                if give_up is not None:
                    if now >= give_up:
                        return False
                    wait = min(wait, give_up - now)
                self._cond.wait(timeout=max(wait, 0.001))

    # ---------- synchronization ----------

    def sync(self, event: Event[T]) -> T:
        leaves = _flatten(event)
        index, value = self._commit(leaves)
        for f in leaves[index][1]:
            value = f(value)
        return value

    def _commit(self, leaves):
        channels = sorted(
            {leaf.channel for leaf, _ in leaves if isinstance(leaf, (SendEvent, RecvEvent))},
            key=lambda c: c.index,
        )
        for c in channels:
            c._lock.acquire()
        try:
            while True:
                ready = [i for i, (leaf, _) in enumerate(leaves) if self._ready(leaf)]
                if not ready:
                    break
                i = ready[self.pick(len(ready))] if len(ready) > 1 else ready[0]
                committed, value = self._fire(leaves[i][0])
                if committed:
                    return i, value
            token = _Token(self, getattr(self._local, "state", None))
            token.arm()
            for i, (leaf, _) in enumerate(leaves):
                self._enroll(leaf, i, token)
        finally:
            for c in reversed(channels):
                c._lock.release()
        return token.wait()

    @staticmethod
    def _ready(leaf):
        if isinstance(leaf, SendEvent):
            return _first_live(leaf.channel._receivers) is not None
        if isinstance(leaf, RecvEvent):
            return _first_live(leaf.channel._senders) is not None
        if isinstance(leaf, AlwaysEvent):
            return True
        return leaf.clock.now_ms >= leaf.deadline_ms

    @staticmethod
    def _fire(leaf):
        # partner may lose its token to a thread holding one of its other
        # channels; the caller then re-polls
        if isinstance(leaf, SendEvent):
            partner = leaf.channel._receivers.popleft()
            if not partner.token.claim():
                return False, None
            partner.token.complete(partner.index, leaf.value)
            return True, None
        if isinstance(leaf, RecvEvent):
            partner = leaf.channel._senders.popleft()
            if not partner.token.claim():
                return False, None
            partner.token.complete(partner.index, None)
            return True, partner.value
        if isinstance(leaf, AlwaysEvent):
            return True, leaf.value
        return True, None

    @staticmethod
    def _enroll(leaf, index, token):
        if isinstance(leaf, SendEvent):
            _first_live(leaf.channel._senders)
            leaf.channel._senders.append(_Enrollment(token, index, leaf.value))
        elif isinstance(leaf, RecvEvent):
            _first_live(leaf.channel._receivers)
            leaf.channel._receivers.append(_Enrollment(token, index))
        elif isinstance(leaf, TimeoutEvent):
            leaf.clock._enroll(leaf.deadline_ms, token, index)


# ================= MODULE SURFACE =================

_kernel = Kernel(config.DEFAULT_SEED)


def kernel() -> Kernel:
    return _kernel


def seed(n):
    """Reset the choice generator; same seed, same choices."""
    _kernel.reseed(n)


def channel(name="") -> Channel:
    return Channel(name)


def spawn(body: Callable[[], None], name=None) -> ThreadId:
    return _kernel.spawn(body, name)


def get_tid() -> ThreadId:
    return _kernel.get_tid()


def send_evt(c: Channel[T], v: T) -> Event[None]:
    return SendEvent(c, v)


def recv_evt(c: Channel[T]) -> Event[T]:
    return RecvEvent(c)


def wrap(e: Event[A], f: Callable[[A], B]) -> Event[B]:
    return WrappedEvent(e, f)


def choose(evs: Iterable[Event[T]]) -> Event[T]:
    return ChoiceEvent(tuple(evs))


def always_evt(v=None) -> Event:
    return AlwaysEvent(v)


NEVER = NeverEvent()


def never_evt() -> Event:
    return NEVER


def timeout_evt(deadline_ms, clock=None) -> Event[None]:
    """Commits once `clock` (the kernel clock by default) reaches deadline_ms."""
    return TimeoutEvent(deadline_ms, clock if clock is not None else _kernel.clock)


def sync(e: Event[T]) -> T:
    return _kernel.sync(e)


def select(evs: Iterable[Event[T]]) -> T:
    return sync(choose(evs))


def send(c: Channel[T], v: T) -> None:
    sync(send_evt(c, v))


def recv(c: Channel[T]) -> T:
    return sync(recv_evt(c))
