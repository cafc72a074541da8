"""Small IO helpers shared by writers: "-" means stdout/stdin."""
from __future__ import annotations

import sys
from contextlib import contextmanager


@contextmanager
def open_output(path: str):
    """Yield a text stream for ``path``, using stdout when path is "-"."""
    if path == "-":
        yield sys.stdout
        sys.stdout.flush()
    else:
        f = open(path, "w", encoding="utf-8", newline="")
        try:
            yield f
        finally:
            f.close()
