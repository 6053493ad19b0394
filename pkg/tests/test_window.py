import pytest

import cml
import window
from conftest import drain, in_thread
from errors import RegistrationError, WindowError
from messages import WM_CREATE, WM_DESTROY, WM_TIMER, WS_CHILD, Rect


def top(c, instance, handler, x=None, y=None, w=None, h=None):
    return window.create(c, "t", [], None, x, y, w, h, None, instance, handler)


def child(c, instance, parent, child_id, handler, x=0, y=0, w=10, h=10):
    return window.create_child(c, "c", [], parent, x, y, w, h, child_id, 0, instance, handler)


# ================= CLASSES =================

def test_duplicate_class_name_is_rejected(instance, plain_class):
    with pytest.raises(RegistrationError):
        window.window_class("Plain", instance, None, None, None, [])


def test_empty_class_name_is_rejected(instance):
    with pytest.raises(RegistrationError):
        window.window_class("", instance, None, None, None, [])


def test_unregister_with_live_window_fails(instance, plain_class, recorder):
    w = top(plain_class, instance, recorder())
    with pytest.raises(RegistrationError):
        window.unregister(plain_class)
    window.destroy(w)
    window.unregister(plain_class)
    with pytest.raises(RegistrationError):
        window.unregister(plain_class)


def test_create_with_unregistered_class_fails(instance, plain_class):
    window.unregister(plain_class)
    with pytest.raises(RegistrationError):
        top(plain_class, instance, lambda w, ch: None)


def test_name_is_free_after_unregister(display, instance, plain_class):
    window.unregister(plain_class)
    again = window.window_class("Plain", instance, None, None, None, [])
    assert display.lookup_class("Plain") is again


# ================= CREATION =================

def test_create_message_comes_first(display, instance, plain_class):
    c = cml.channel()

    def handler(w, ch):
        cml.send(c, cml.recv(ch))

    w = top(plain_class, instance, handler)
    display.post(w.id, WM_TIMER(1))
    finished, first = in_thread(cml.recv, c)
    assert finished and first == WM_CREATE()


def test_default_geometry_cascades(instance, plain_class):
    w0 = top(plain_class, instance, lambda w, ch: None)
    w1 = top(plain_class, instance, lambda w, ch: None)
    assert window.get_window_rect(w0) == Rect(0, 0, 640, 480)
    assert window.get_window_rect(w1) == Rect(64, 64, 704, 544)
    assert w0.name == "w1" and w1.name == "w2"
    assert not w0.shown


def test_explicit_geometry(instance, plain_class):
    w = top(plain_class, instance, lambda w, ch: None, 5, 6, 316, 262)
    assert window.get_client_rect(w) == Rect(0, 0, 316, 262)
    assert window.get_window_rect(w) == Rect(5, 6, 321, 268)


def test_zero_size_window(instance, plain_class):
    w = top(plain_class, instance, lambda w, ch: None, 0, 0, 0, 0)
    assert window.get_client_rect(w) == Rect(0, 0, 0, 0)


def test_child_ids_are_unique_among_siblings(instance, plain_class):
    p1 = top(plain_class, instance, lambda w, ch: None)
    p2 = top(plain_class, instance, lambda w, ch: None)
    c1 = child(plain_class, instance, p1, 101, lambda w, ch: None)
    with pytest.raises(WindowError):
        child(plain_class, instance, p1, 101, lambda w, ch: None)
    c2 = child(plain_class, instance, p2, 101, lambda w, ch: None)
    assert c1.parent == p1 and c2.parent == p2
    assert WS_CHILD in c1.styles
    assert c1.child_id == 101


def test_child_of_destroyed_parent_fails(instance, plain_class):
    p = top(plain_class, instance, lambda w, ch: None)
    window.destroy(p)
    with pytest.raises(WindowError):
        child(plain_class, instance, p, 1, lambda w, ch: None)


# ================= OPERATIONS =================

def test_move_keeps_size(instance, plain_class):
    w = top(plain_class, instance, lambda w, ch: None, 0, 0, 100, 50)
    window.move(w, 10, 20)
    assert window.get_window_rect(w) == Rect(10, 20, 110, 70)
    assert window.get_client_rect(w) == Rect(0, 0, 100, 50)


def test_negative_size_is_rejected(instance, plain_class):
    w = top(plain_class, instance, lambda w, ch: None, 0, 0, 100, 50)
    with pytest.raises(WindowError):
        window.resize(w, -5, 10)
    assert window.get_client_rect(w) == Rect(0, 0, 100, 50)


def test_operations_on_destroyed_window_fail(instance, plain_class):
    w = top(plain_class, instance, lambda w, ch: None)
    window.destroy(w)
    for op, args in [
        (window.show, ()),
        (window.move, (1, 1)),
        (window.get_client_rect, ()),
        (window.send, (WM_TIMER(1),)),
        (window.set_foreground, ()),
    ]:
        with pytest.raises(WindowError):
            op(w, *args)


def test_send_reaches_handler(display, instance, plain_class, recorder):
    h = recorder()
    w = top(plain_class, instance, h)
    window.send(w, WM_TIMER(9))
    drain(display)
    assert h.log == [WM_CREATE(), WM_TIMER(9)]


def test_destroy_takes_children_first(display, instance, plain_class, recorder):
    p = top(plain_class, instance, recorder())
    a = child(plain_class, instance, p, 1, recorder())
    b = child(plain_class, instance, p, 2, recorder())
    window.destroy(p)
    window.destroy(p)
    destroys = [name for name, m in display.deliveries if isinstance(m, WM_DESTROY)]
    assert destroys == [a.name, b.name, p.name]
    assert display.live_windows() == []


def test_destroy_kills_timers(display, instance, plain_class):
    w = top(plain_class, instance, lambda w, ch: None)
    window.set_timer(w, 1, 10)
    window.destroy(w)
    assert display.next_timer_due() is None


# ================= LOOP =================

def test_quit_code_is_loop_result(display, instance, plain_class):
    def handler(w, ch):
        cml.recv(ch)
        window.quit(7)

    w = top(plain_class, instance, handler)
    finished, code = in_thread(window.msg_loop, w)
    assert finished and code == 7


def test_winmain_pattern_leaves_nothing_registered(display, instance):
    c = window.window_class("Main", instance, None, None, None, [])

    def handler(w, ch):
        while True:
            m = cml.recv(ch)
            window.default(w, m)
            if isinstance(m, WM_DESTROY):
                window.quit(0)
                return
            if isinstance(m, WM_CREATE):
                window.destroy(w)

    w = top(c, instance, handler)
    finished, code = in_thread(window.msg_loop, w)
    window.unregister(c)
    assert finished and code == 0
    assert display.live_windows() == []
    assert display.registered_classes() == []
