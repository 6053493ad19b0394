import os

import pytest

import bounce
import cli
import config
import resources
import window
from bounce import BounceState, compute_args, on_timer, step
from conftest import drain
from messages import WM_SIZE, WM_TIMER
from resources import Manifest
from script import load_script

SCRIPTS = os.path.join(os.path.dirname(__file__), "..", "scripts")


def run_script(demo, name, max_ms=config.DEFAULT_MAX_MS):
    events = load_script(os.path.join(SCRIPTS, name))
    return cli._run_once(demo, events, Manifest.load(config.DEFAULT_MANIFEST), 0, max_ms, None)


def blit_origins(width, height, ticks):
    """Where a 158x131 logo with radii 59x45 is drawn, tick by tick, after
    recentering in a width x height client area: draw, move 10px, turn back
    once the edge reaches a wall."""
    x, y = width // 2, height // 2
    dx = dy = 10
    out = []
    for _ in range(ticks):
        out.append((x - 79, y - 65))
        x, y = x + dx, y + dy
        if x + 59 >= width or x - 59 <= 0:
            dx = -dx
        if y + 45 >= height or y - 45 <= 0:
            dy = -dy
    return out


# ================= MOTION =================

def test_compute_args_recenters():
    s = compute_args(316, 262, None)
    assert (s.xc, s.yc, s.xm, s.ym) == (158, 131, 10, 10)


def test_step_moves_the_center():
    s = step(BounceState(316, 262, 158, 131, 10, 10))
    assert (s.xc, s.yc, s.xm, s.ym) == (168, 141, 10, 10)


def test_step_turns_at_the_right_wall():
    s = step(BounceState(316, 262, 250, 131, 10, 0))
    assert (s.xc, s.xm) == (260, -10)


def test_step_turns_at_the_top_wall():
    s = step(BounceState(316, 262, 158, 50, 0, -10))
    assert (s.yc, s.ym) == (40, 10)


@pytest.mark.parametrize("size", [(316, 262), (200, 150), (500, 400)])
def test_center_stays_near_the_client_area(size):
    s = compute_args(*size, None)
    for _ in range(1000):
        s = step(s)
        assert -bounce.MOVE_R <= s.xc - bounce.X_RADIUS
        assert s.xc + bounce.X_RADIUS <= s.xs + bounce.MOVE_R
        assert -bounce.MOVE_R <= s.yc - bounce.Y_RADIUS
        assert s.yc + bounce.Y_RADIUS <= s.ys + bounce.MOVE_R


# ================= HANDLER =================

@pytest.fixture
def bounce_class(instance):
    return window.window_class(
        bounce.CLASS_NAME, instance, resources.ARROW, resources.APPLICATION, resources.WHITE, [],
    )


def test_on_timer_blits_then_steps(display, instance, plain_class):
    w = window.create(plain_class, "t", [], None, 0, 0, 316, 262, None, instance, lambda w, ch: None)
    s = compute_args(316, 262, resources.bitmap_load(bounce.BITMAP))
    after = on_timer(w, s)
    assert display.trace.lines() == [f"BITBLT {w.name} 79 66 158 131 smlnj.bmp 0 0 SRCCOPY"]
    assert (after.xc, after.yc) == (168, 141)
    assert display.live_dcs() == 0


def test_other_timer_ids_are_ignored(display, instance, bounce_class):
    w = window.create(bounce_class, "b", [], None, 0, 0, 316, 262, None, instance, bounce.bounce)
    window.send(w, WM_SIZE(316, 262))
    window.send(w, WM_TIMER(bounce.TIMER_ID + 1))
    drain(display)
    assert not [line for line in display.trace.lines() if line.startswith("BITBLT")]
    window.send(w, WM_TIMER(bounce.TIMER_ID))
    drain(display)
    assert [line for line in display.trace.lines() if line.startswith("BITBLT")] == [
        f"BITBLT {w.name} 79 66 158 131 smlnj.bmp 0 0 SRCCOPY"
    ]
    window.destroy(w)


# ================= WHOLE DEMO =================

def test_scripted_run_matches_the_scalar_model():
    code, display = run_script("bounce", "bounce_resize_close.script")
    assert code == 0
    blits = [line for line in display.trace.lines() if line.startswith("BITBLT")]

    origins = [tuple(map(int, line.split()[2:4])) for line in blits]
    assert origins == blit_origins(316, 262, 100)
    assert origins[0] == (79, 66)
    assert all(line.endswith(" 158 131 smlnj.bmp 0 0 SRCCOPY") for line in blits)
    assert display.live_windows() == []
    assert display.next_timer_due() is None


def test_demo_leaves_no_dcs_or_classes():
    _, display = run_script("bounce", "bounce_resize_close.script")
    assert display.live_dcs() == 0
    assert display.registered_classes() == []


def test_without_close_the_harness_still_ends_the_demo():
    code, display = cli._run_once("bounce", [], Manifest.load(config.DEFAULT_MANIFEST), 0, 200, None)
    assert code == 0
    assert display.now_ms == 200
    assert not display.live_windows()
