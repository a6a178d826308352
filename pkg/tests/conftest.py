import sys
from pathlib import Path

# allow running the suite without an editable install
_src = Path(__file__).resolve().parents[1] / "src"
if str(_src) not in sys.path:
    try:
        import bcalc  # noqa: F401
    except ImportError:
        sys.path.insert(0, str(_src))
