import os

# ================= CONFIG =================

ENV_PREFIX = "CMLWIN_"


def _env(name, default):
    return os.environ.get(ENV_PREFIX + name, default)


# choice policy
DEFAULT_SEED = int(_env("SEED", "0"))

# pump settling: a thread running outside sync for longer than this
# (wall seconds) is treated as stalled and no longer holds the pump back
STALL_THRESHOLD_S = float(_env("STALL_THRESHOLD_S", "1.0"))
SETTLE_POLL_S = float(_env("SETTLE_POLL_S", "0.05"))

# how many recent (window, message) deliveries a display remembers
DELIVERY_LOG_SIZE = int(_env("DELIVERY_LOG_SIZE", "10000"))

# CW_USEDEFAULT stand-ins
DEFAULT_WIDTH = 640
DEFAULT_HEIGHT = 480
CASCADE_STEP = 64

# resources
DEFAULT_MANIFEST = _env(
    "MANIFEST",
    os.path.join(os.path.dirname(os.path.abspath(__file__)), "resources.manifest"),
)

# harness
DEFAULT_MAX_MS = int(_env("MAX_MS", "2000"))
LOG_LEVEL = _env("LOG_LEVEL", "WARNING")

# ================= EXIT STATUS =================

EXIT_USAGE = 64
EXIT_DATAERR = 65
EXIT_NOINPUT = 66
EXIT_SOFTWARE = 70
