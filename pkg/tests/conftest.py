import pathlib
import sys

try:
    import heunlie  # noqa: F401
except ImportError:  # running from a fresh checkout without installing
    sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))
