"""Bundled specification files."""
from importlib import resources


def path(name: str):
    """Filesystem path of a bundled file, e.g. ``path("streamcalc.spec")``."""
    return resources.files(__name__).joinpath(name)


def read(name: str) -> str:
    return path(name).read_text(encoding="utf-8")
