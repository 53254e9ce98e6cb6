"""Kernel selection: the compiled extension when built, else pure Python.

Set ``SOAS_PURE=1`` to force the fallback.
"""
import os

if os.environ.get("SOAS_PURE") == "1":
    from . import _kernels as _impl
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        from . import _kernels as _impl

IMPL = _impl.IMPL
shift = _impl.shift
instantiate = _impl.instantiate
apply_meta_map = _impl.apply_meta_map
size = _impl.size
metas = _impl.metas
occurs = _impl.occurs
free_vars = _impl.free_vars
remap_free = _impl.remap_free
