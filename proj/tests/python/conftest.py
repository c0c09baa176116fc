import os
import sys

# The CMake build drops the extension module into <build>/python/wfdiff and
# exports that directory; fall back to the source layout otherwise.
_pydir = os.environ.get("WFDIFF_PYTHON_DIR")
if _pydir and _pydir not in sys.path:
    sys.path.insert(0, _pydir)
