"""Python surface of the dynABE pipeline.

The heavy lifting lives in the compiled `_core` extension; this package
re-exports it. In an installed wheel `_core` sits inside the package, while
test runs against a plain CMake build pick it up from the build directory on
PYTHONPATH.
"""

try:
    from . import _core
except ImportError:  # build-tree layout: extension next to the package dir
    import _core

DynabeError = _core.DynabeError
run = _core.run
report = _core.report
verify_checksums = _core.verify_checksums
online_update = _core.online_update
select_features = _core.select_features
max_drawdown = _core.max_drawdown
annualized_return = _core.annualized_return
sharpe_ratio = _core.sharpe_ratio

__version__ = _core.__version__

__all__ = [
    "DynabeError",
    "run",
    "report",
    "verify_checksums",
    "online_update",
    "select_features",
    "max_drawdown",
    "annualized_return",
    "sharpe_ratio",
    "__version__",
]
