"""Sharded blockchain federated-learning simulator (C++ core bindings)."""

try:
    from ._srbfl import *  # noqa: F401,F403
    from ._srbfl import __version__  # noqa: F401
except ImportError:  # build-tree layout: the extension sits on sys.path itself
    from _srbfl import *  # noqa: F401,F403
    from _srbfl import __version__  # noqa: F401
