"""Message algebra and geometry shared by every other module.

Rects use the half-open pixel convention: a rect covers left <= x < right
and top <= y < bottom, so adjacent rects never share a pixel.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


# ================= GEOMETRY =================

@dataclass(frozen=True, slots=True)
class Rect:
    left: int
    top: int
    right: int
    bottom: int

    def __post_init__(self):
        if self.left > self.right or self.top > self.bottom:
            raise ValueError(f"inverted rect {tuple(self)}")

    @classmethod
    def of_size(cls, x, y, width, height):
        return cls(x, y, x + width, y + height)

    @property
    def width(self):
        return self.right - self.left

    @property
    def height(self):
        return self.bottom - self.top

    @property
    def empty(self):
        return self.width == 0 or self.height == 0

    def __iter__(self):
        return iter((self.left, self.top, self.right, self.bottom))

    def __str__(self):
        return f"{self.left} {self.top} {self.right} {self.bottom}"

    def translate(self, dx, dy):
        return Rect(self.left + dx, self.top + dy, self.right + dx, self.bottom + dy)

    def moved_to(self, x, y):
        return Rect.of_size(x, y, self.width, self.height)

    def resized(self, width, height):
        return Rect.of_size(self.left, self.top, width, height)

    def client(self):
        """Same size, at the origin."""
        return Rect(0, 0, self.width, self.height)

    def intersect(self, other):
        return rect_intersect(self, other)

    def contains(self, x, y):
        return rect_contains(self, x, y)

    def union(self, other):
        """Bounding rect of both."""
        return Rect(
            min(self.left, other.left),
            min(self.top, other.top),
            max(self.right, other.right),
            max(self.bottom, other.bottom),
        )

    def covers(self, other):
        return (
            self.left <= other.left
            and self.top <= other.top
            and other.right <= self.right
            and other.bottom <= self.bottom
        )


def rect_intersect(a: Rect, b: Rect) -> Rect | None:
    """Largest rect inside both, or None when they share no pixel."""
    left, top = max(a.left, b.left), max(a.top, b.top)
    right, bottom = min(a.right, b.right), min(a.bottom, b.bottom)
    if left >= right or top >= bottom:
        return None
    return Rect(left, top, right, bottom)


def rect_contains(a: Rect, x: int, y: int) -> bool:
    return a.left <= x < a.right and a.top <= y < a.bottom


# ================= STYLES =================

class ClassStyle(Enum):
    CS_HREDRAW = "CS_HREDRAW"
    CS_VREDRAW = "CS_VREDRAW"


class WindowStyle(Enum):
    WS_OVERLAPPEDWINDOW = "WS_OVERLAPPEDWINDOW"
    WS_CHILD = "WS_CHILD"
    WS_VISIBLE = "WS_VISIBLE"


class ShowStyle(Enum):
    SW_NORMAL = "SW_NORMAL"
    SW_HIDE = "SW_HIDE"


CS_HREDRAW = ClassStyle.CS_HREDRAW
CS_VREDRAW = ClassStyle.CS_VREDRAW
WS_OVERLAPPEDWINDOW = WindowStyle.WS_OVERLAPPEDWINDOW
WS_CHILD = WindowStyle.WS_CHILD
WS_VISIBLE = WindowStyle.WS_VISIBLE
SW_NORMAL = ShowStyle.SW_NORMAL
SW_HIDE = ShowStyle.SW_HIDE


# ================= MESSAGES =================

class Msg:
    """Base of all window messages. The text form is the message name
    followed by its fields, e.g. `WM_SIZE 400 300`."""

    __slots__ = ()

    def __str__(self):
        fields = [str(getattr(self, name)) for name in self.__match_args__]
        return " ".join([type(self).__name__, *fields])


@dataclass(frozen=True, slots=True)
class WM_CREATE(Msg):
    pass


@dataclass(frozen=True, slots=True)
class WM_SIZE(Msg):
    width: int
    height: int


@dataclass(frozen=True, slots=True)
class WM_PAINT(Msg):
    invalid: Rect


@dataclass(frozen=True, slots=True)
class WM_DESTROY(Msg):
    pass


@dataclass(frozen=True, slots=True)
class WM_TIMER(Msg):
    timer_id: int


@dataclass(frozen=True, slots=True)
class WM_MOUSEMOVE(Msg):
    x: int
    y: int


@dataclass(frozen=True, slots=True)
class WM_LBUTTONDOWN(Msg):
    x: int
    y: int


@dataclass(frozen=True, slots=True)
class WM_LBUTTONUP(Msg):
    x: int
    y: int


@dataclass(frozen=True, slots=True)
class WM_LBUTTONDBLCLK(Msg):
    x: int
    y: int


@dataclass(frozen=True, slots=True)
class WM_KEYDOWN(Msg):
    key_code: int


@dataclass(frozen=True, slots=True)
class WM_CHAR(Msg):
    code_point: int


@dataclass(frozen=True, slots=True)
class WM_CLOSE(Msg):
    pass


@dataclass(frozen=True, slots=True)
class WM_COMMAND(Msg):
    """Sent by a control to its parent: which child, which notification."""

    control_id: int
    code: str


@dataclass(frozen=True, slots=True)
class WM_QUIT(Msg):
    """System-queue sentinel; never delivered to a window."""

    exit_code: int

