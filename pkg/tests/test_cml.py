import random
import threading
import time

import pytest

import cml
from cml import VirtualClock
from errors import ClockError, SpawnError
from conftest import in_thread, still_blocked


# ================= RENDEZVOUS =================

def test_recv_gets_the_sent_value():
    c = cml.channel()
    cml.spawn(lambda: cml.send(c, 41))
    assert cml.sync(cml.wrap(cml.recv_evt(c), lambda v: v + 1)) == 42


def test_send_blocks_without_a_receiver():
    c = cml.channel()
    assert still_blocked(cml.send, c, 1)


def test_recv_blocks_without_a_sender():
    c = cml.channel()
    assert still_blocked(cml.recv, c)


def test_send_completes_only_with_a_receiver():
    c = cml.channel()
    done = threading.Event()

    def sender():
        cml.send(c, "x")
        done.set()

    cml.spawn(sender)
    assert not done.wait(0.1)
    assert cml.recv(c) == "x"
    assert done.wait(2)


def test_transfers_are_conserved_over_random_schedules():
    rng = random.Random(1)
    for _ in range(1000):
        c = cml.channel()
        n = rng.randint(1, 3)
        values = list(range(n))
        received = []
        lock = threading.Lock()
        finished = threading.Semaphore(0)

        def receiver():
            v = cml.recv(c)
            with lock:
                received.append(v)
            finished.release()

        def sender(v):
            return lambda: cml.send(c, v)

        bodies = [receiver for _ in values] + [sender(v) for v in values]
        rng.shuffle(bodies)
        for body in bodies:
            cml.spawn(body)
        for _ in values:
            assert finished.acquire(timeout=5)
        assert sorted(received) == values


def test_blocked_party_counts():
    c = cml.channel("counted")
    cml.spawn(lambda: cml.send(c, 1))
    cml.spawn(lambda: cml.send(c, 2))
    deadline = time.monotonic() + 2
    while c.blocked_senders < 2 and time.monotonic() < deadline:
        time.sleep(0.01)
    assert c.blocked_senders == 2
    assert c.blocked_receivers == 0
    assert sorted([cml.recv(c), cml.recv(c)]) == [1, 2]


# ================= BASE EVENTS =================

def test_always_commits_immediately():
    assert cml.sync(cml.always_evt(5)) == 5


def test_never_and_empty_choice_block_forever():
    assert still_blocked(cml.sync, cml.NEVER)
    assert still_blocked(cml.sync, cml.never_evt())
    assert still_blocked(cml.sync, cml.choose([]))


def test_never_loses_every_choice():
    assert cml.select([cml.NEVER, cml.always_evt("a")]) == "a"


def test_sync_rejects_non_events():
    with pytest.raises(TypeError):
        cml.sync(42)


# ================= WRAP =================

def test_wraps_apply_innermost_first():
    e = cml.wrap(cml.wrap(cml.always_evt(3), lambda v: v + 1), lambda v: v * 10)
    assert cml.sync(e) == 40


def test_method_wrap_matches_function_wrap():
    assert cml.sync(cml.always_evt(2).wrap(str)) == "2"


def test_losing_branch_wraps_never_run():
    calls = {"win": 0, "lose": 0}

    def count(name):
        def f(v):
            calls[name] += 1
            return v
        return f

    for _ in range(500):
        quiet = cml.channel()
        e = cml.choose([
            cml.wrap(cml.always_evt(1), count("win")),
            cml.wrap(cml.recv_evt(quiet), count("lose")),
            cml.wrap(cml.NEVER, count("lose")),
        ])
        assert cml.sync(e) == 1
    assert calls == {"win": 500, "lose": 0}


def test_wrap_exception_reaches_the_syncing_thread():
    def boom(_):
        raise ValueError("in wrap")

    with pytest.raises(ValueError, match="in wrap"):
        cml.sync(cml.wrap(cml.always_evt(), boom))


def test_events_are_reusable():
    c = cml.channel()
    e = cml.recv_evt(c)
    for v in range(3):
        cml.spawn(lambda v=v: cml.send(c, v))
        assert cml.sync(e) in range(3)


# ================= CHOICE =================

def test_two_ready_branches_are_chosen_fairly():
    cml.seed(12345)
    e = cml.choose([cml.always_evt(0), cml.always_evt(1)])
    ones = sum(cml.sync(e) for _ in range(10_000))
    assert 0.40 <= ones / 10_000 <= 0.60


def test_seeded_choices_repeat():
    e = cml.choose([cml.always_evt(i) for i in range(5)])
    cml.seed(99)
    first = [cml.sync(e) for _ in range(50)]
    cml.seed(99)
    assert [cml.sync(e) for _ in range(50)] == first


def test_nested_choice_is_flattened():
    flat = cml.choose([cml.always_evt("a"), cml.always_evt("b"), cml.always_evt("c")])
    nested = cml.choose([cml.always_evt("a"), cml.choose([cml.always_evt("b"), cml.always_evt("c")])])
    cml.seed(3)
    seen_flat = {cml.sync(flat) for _ in range(300)}
    cml.seed(3)
    seen_nested = {cml.sync(nested) for _ in range(300)}
    assert seen_flat == seen_nested == {"a", "b", "c"}


def test_choice_commits_exactly_one_communication():
    a, b = cml.channel(), cml.channel()
    for _ in range(200):
        cml.spawn(lambda: cml.send(a, "a"))
        cml.spawn(lambda: cml.send(b, "b"))
        got = cml.select([cml.recv_evt(a), cml.recv_evt(b)])
        other, expected = (b, "b") if got == "a" else (a, "a")
        # the losing sender is still waiting
        assert cml.recv(other) == expected


def test_crossed_send_recv_choices_transfer_exactly_once():
    for _ in range(10_000):
        c1, c2 = cml.channel(), cml.channel()
        box = {}
        done = threading.Event()

        def other():
            box["b"] = cml.select([
                cml.wrap(cml.send_evt(c2, 2), lambda _: "sent"),
                cml.wrap(cml.recv_evt(c1), lambda v: ("got", v)),
            ])
            done.set()

        cml.spawn(other)
        mine = cml.select([
            cml.wrap(cml.send_evt(c1, 1), lambda _: "sent"),
            cml.wrap(cml.recv_evt(c2), lambda v: ("got", v)),
        ])
        assert done.wait(5)
        assert (mine, box["b"]) in [("sent", ("got", 1)), (("got", 2), "sent")]


# ================= TIME =================

def test_timeout_commits_when_the_clock_reaches_the_deadline():
    clock = VirtualClock(cml.kernel())
    result = {}
    t = threading.Thread(target=lambda: result.setdefault("v", cml.sync(cml.timeout_evt(10, clock))), daemon=True)
    t.start()
    time.sleep(0.05)
    clock.advance_to(9)
    t.join(0.1)
    assert t.is_alive()
    clock.advance_to(10)
    t.join(2)
    assert not t.is_alive()
    assert result == {"v": None}


def test_past_deadline_is_immediate():
    clock = VirtualClock(cml.kernel())
    clock.advance(50)
    assert cml.sync(cml.timeout_evt(20, clock)) is None


def test_timeout_loses_to_a_ready_event():
    clock = VirtualClock(cml.kernel())
    e = cml.choose([cml.wrap(cml.timeout_evt(100, clock), lambda _: "late"), cml.always_evt("now")])
    assert cml.sync(e) == "now"


def test_clock_never_goes_back():
    clock = VirtualClock(cml.kernel())
    clock.advance_to(30)
    with pytest.raises(ClockError):
        clock.advance_to(10)
    with pytest.raises(ClockError):
        clock.advance(-1)


# ================= THREADS =================

def test_spawned_threads_have_distinct_ids():
    c = cml.channel()
    tids = [cml.spawn(lambda: cml.send(c, cml.get_tid())) for _ in range(3)]
    reported = {cml.recv(c) for _ in tids}
    assert reported == set(tids)
    assert cml.get_tid() not in reported


def test_quiescence_waits_for_running_threads():
    c = cml.channel()
    started = threading.Event()

    def busy():
        started.set()
        time.sleep(0.2)
        cml.recv(c)

    cml.spawn(busy)
    started.wait(2)
    t0 = time.monotonic()
    assert cml.kernel().wait_quiescent(stall_s=5)
    assert time.monotonic() - t0 >= 0.1
    cml.send(c, None)


def test_stalled_thread_no_longer_holds_quiescence():
    stop = threading.Event()
    cml.spawn(lambda: stop.wait(10))
    finished, ok = in_thread(cml.kernel().wait_quiescent, 0.2, timeout=3)
    stop.set()
    assert finished and ok


def wait_for_thread_count(n, timeout=10.0):
    deadline = time.monotonic() + timeout
    while cml.kernel().thread_count > n and time.monotonic() < deadline:
        time.sleep(0.01)
    return cml.kernel().thread_count <= n


def test_ten_thousand_trivial_spawns_complete():
    baseline = cml.kernel().thread_count
    done = threading.Semaphore(0)
    for _ in range(10_000):
        cml.spawn(done.release)
    for _ in range(10_000):
        assert done.acquire(timeout=10)
    assert wait_for_thread_count(baseline)


def test_spawned_senders_all_rendezvous():
    baseline = cml.kernel().thread_count
    c = cml.channel()
    for i in range(1000):
        cml.spawn(lambda i=i: cml.send(c, i))
    assert sorted(cml.recv(c) for _ in range(1000)) == list(range(1000))
    assert wait_for_thread_count(baseline)


def test_failed_thread_start_is_a_spawn_error(monkeypatch):
    baseline = cml.kernel().thread_count

    def refuse(self):
        raise RuntimeError("can't start new thread")

    monkeypatch.setattr(threading.Thread, "start", refuse)
    with pytest.raises(SpawnError):
        cml.spawn(lambda: None)
    monkeypatch.undo()
    assert cml.kernel().thread_count <= baseline
