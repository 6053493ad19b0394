"""Icons, cursors, brushes, bitmaps, menus and device contexts.

Loadable resources come from a manifest, one record per line:

    bitmap smlnj.bmp 158 131
    icon   logo.ico  32 32
    menu   app_menu  1=Open 2=Exit

Drawing through a device context appends records to the display trace;
nothing is rasterized.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum

import structlog

import display as display_mod
from display import BitBlt, DrawIcon, FillRect, Label
from errors import DCError, MenuError, ResourceError
from messages import Rect

log = structlog.get_logger(__name__)


# ================= MANIFEST =================

@dataclass(frozen=True)
class ManifestEntry:
    kind: str
    name: str
    width: int = 0
    height: int = 0
    items: tuple = ()


class Manifest:
    SIZED_KINDS = ("bitmap", "icon", "cursor")

    def __init__(self, entries=()):
        self._entries = {(e.kind, e.name): e for e in entries}

    @classmethod
    def load(cls, path):
        try:
            with open(path) as f:
                text = f.read()
        except OSError as exc:
            raise ResourceError(f"cannot read manifest {path}: {exc}") from exc
        manifest = cls.parse(text, source=str(path))
        log.debug("manifest_loaded", path=str(path), entries=len(manifest._entries))
        return manifest

    @classmethod
    def parse(cls, text, source="<manifest>"):
        entries = []
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            kind = fields[0]
            try:
                if kind in cls.SIZED_KINDS:
                    _, name, width, height = fields
                    width, height = int(width), int(height)
                    if width <= 0 or height <= 0:
                        raise ValueError("dimensions must be positive")
                    entries.append(ManifestEntry(kind, name, width, height))
                elif kind == "menu":
                    items = []
                    for item in fields[2:]:
                        command_id, label = item.split("=", 1)
                        items.append((int(command_id), label.replace("_", " ")))
                    entries.append(ManifestEntry(kind, fields[1], items=tuple(items)))
                else:
                    raise ValueError(f"unknown resource kind {kind!r}")
            except (ValueError, IndexError) as exc:
                raise ResourceError(f"{source}:{line_no}: {exc}") from exc
        return cls(entries)

    def lookup(self, kind, name) -> ManifestEntry:
        entry = self._entries.get((kind, name))
        if entry is None:
            raise ResourceError(f"no {kind} named {name!r} in the manifest")
        return entry

    def __len__(self):
        return len(self._entries)


def _manifest(instance=None) -> Manifest:
    display = instance.display if instance is not None else display_mod.current()
    if display.manifest is None:
        raise ResourceError("no resource manifest loaded")
    return display.manifest


# ================= ICONS / CURSORS / BRUSHES =================

@dataclass(frozen=True)
class Icon:
    name: str
    builtin: bool = False


@dataclass(frozen=True)
class Cursor:
    name: str
    builtin: bool = False


@dataclass(frozen=True)
class Brush:
    name: str
    builtin: bool = False


APPLICATION = Icon("application", True)
HAND = Icon("hand", True)
QUESTION = Icon("question", True)
EXCLAMATION = Icon("exclamation", True)
ASTERISK = Icon("asterisk", True)

ARROW = Cursor("arrow", True)

WHITE = Brush("white", True)
GRAY = Brush("gray", True)

STOCK_ICONS = {i.name: i for i in (APPLICATION, HAND, QUESTION, EXCLAMATION, ASTERISK)}


def icon_load(instance, name) -> Icon:
    if name in STOCK_ICONS:
        return STOCK_ICONS[name]
    _manifest(instance).lookup("icon", name)
    return Icon(name)


def cursor_load(instance, name) -> Cursor:
    _manifest(instance).lookup("cursor", name)
    return Cursor(name)


# ================= BITMAPS =================

@dataclass(eq=False)
class Bitmap:
    name: str
    width: int
    height: int
    deleted: bool = False

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ResourceError(f"bitmap {self.name} has no area")


def bitmap_load(name, instance=None) -> Bitmap:
    entry = _manifest(instance).lookup("bitmap", name)
    return Bitmap(name, entry.width, entry.height)


def bitmap_delete(b: Bitmap):
    if b.deleted:
        raise ResourceError(f"bitmap {b.name} already deleted")
    b.deleted = True


# ================= DEVICE CONTEXTS =================

class DCKind(Enum):
    WINDOW = "window"
    MEMORY = "memory"


class Rop(Enum):
    SRCCOPY = "SRCCOPY"


SRCCOPY = Rop.SRCCOPY


@dataclass(eq=False)
class DeviceContext:
    display: object
    window: int
    window_name: str
    kind: DCKind
    owner: int = field(default_factory=threading.get_ident)
    bitmap: Bitmap | None = None
    live: bool = True

    def check(self):
        if not self.live:
            raise DCError(f"{self.kind.value} DC for {self.window_name} is no longer valid")
        if threading.get_ident() != self.owner:
            raise DCError(f"DC for {self.window_name} used outside the thread that created it")


def dc_get(w) -> DeviceContext:
    rec = w.display.record(w.id)
    dc = DeviceContext(w.display, w.id, rec.name, DCKind.WINDOW)
    w.display.dc_opened(dc)
    return dc


def dc_release(w, dc: DeviceContext):
    dc.check()
    if dc.kind is not DCKind.WINDOW or dc.window != w.id:
        raise DCError(f"DC is not a window DC of {dc.window_name}")
    dc.live = False
    dc.display.dc_closed(dc)


def dc_create_compatible(dc: DeviceContext) -> DeviceContext:
    dc.check()
    mem = DeviceContext(dc.display, dc.window, dc.window_name, DCKind.MEMORY)
    dc.display.dc_opened(mem)
    return mem


def dc_delete(dc: DeviceContext):
    dc.check()
    if dc.kind is not DCKind.MEMORY:
        raise DCError("only memory DCs are deleted; release window DCs")
    dc.live = False
    dc.bitmap = None
    dc.display.dc_closed(dc)


def bitmap_select(dc: DeviceContext, b: Bitmap) -> Bitmap | None:
    """Select `b` into a memory DC; returns the previous selection."""
    dc.check()
    if dc.kind is not DCKind.MEMORY:
        raise DCError("bitmaps are selected into memory DCs")
    if b.deleted:
        raise ResourceError(f"bitmap {b.name} was deleted")
    previous, dc.bitmap = dc.bitmap, b
    return previous


def dc_bitblt(dest: DeviceContext, x, y, w, h, src: DeviceContext, sx, sy, rop: Rop):
    dest.check()
    src.check()
    if src.kind is DCKind.MEMORY:
        if src.bitmap is None:
            raise DCError("source memory DC has no bitmap selected")
        source = src.bitmap.name
    else:
        source = src.window_name
    dest.display.draw(BitBlt(dest.window_name, x, y, w, h, source, sx, sy, Rop(rop).value))


def icon_draw(dc: DeviceContext, x, y, icon: Icon):
    dc.check()
    dc.display.draw(DrawIcon(dc.window_name, x, y, icon.name))


def dc_fill_rect(dc: DeviceContext, rect: Rect, brush: Brush):
    dc.check()
    dc.display.draw(FillRect(dc.window_name, rect, brush.name))


def dc_text(dc: DeviceContext, text: str):
    dc.check()
    dc.display.draw(Label(dc.window_name, text))


# ================= MENUS =================

class MenuKind(Enum):
    BAR = "bar"
    POPUP = "popup"


@dataclass(eq=False)
class Menu:
    kind: MenuKind
    items: list = field(default_factory=list)
    destroyed: bool = False

    def check(self):
        if self.destroyed:
            raise MenuError("menu was destroyed")

    def structure(self):
        """Nested tuples describing the menu, for comparisons."""
        return (self.kind.value, tuple(
            ("item", entry, label) if isinstance(entry, int) else ("popup", label, entry.structure())
            for entry, label in self.items
        ))


def menu_create() -> Menu:
    return Menu(MenuKind.BAR)


def menu_create_popup() -> Menu:
    return Menu(MenuKind.POPUP)


def menu_append_item(m: Menu, command_id: int, label: str):
    m.check()
    if any(entry == command_id for entry, _ in m.items if isinstance(entry, int)):
        raise MenuError(f"command id {command_id} already in this menu")
    m.items.append((command_id, label))


def menu_append_popup(m: Menu, sub: Menu, label: str):
    m.check()
    sub.check()
    if sub is m:
        raise MenuError("a menu cannot contain itself")
    m.items.append((sub, label))


def menu_destroy(m: Menu):
    m.check()
    m.destroyed = True
    for entry, _ in m.items:
        if isinstance(entry, Menu) and not entry.destroyed:
            menu_destroy(entry)


def menu_load(instance, name) -> Menu:
    entry = _manifest(instance).lookup("menu", name)
    m = menu_create()
    for command_id, label in entry.items:
        menu_append_item(m, command_id, label)
    return m


def menu_get(w) -> Menu | None:
    return w.display.record(w.id).menu
