"""Which simulation core is running, and access to the interpreted twin.

``gsres._core`` resolves to the compiled extension when it was built (the
.so shadows the .py on import) and to the interpreted source otherwise.
Both produce bit-identical numbers; the compiled one is one to two orders
of magnitude faster.  ``load_interpreted`` always loads the interpreted
twin from source, so benchmarks and equivalence tests can compare the two
inside one process.
"""

from __future__ import annotations

import importlib.util
import os

from gsres import _core


def name() -> str:
    return _core.backend_name()


def is_compiled() -> bool:
    return _core.backend_name() == "compiled"


def load_interpreted():
    path = os.path.join(os.path.dirname(os.path.abspath(__file__)), "_core.py")
    spec = importlib.util.spec_from_file_location("gsres._core_interpreted", path)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module
