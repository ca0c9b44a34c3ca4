"""Kernel backend selection: compiled extension if built, scipy fallback otherwise."""

try:
    from spectralstop import _kernels as _backend

    BACKEND = "compiled"
except ImportError:  # pragma: no cover - depends on build environment
    from spectralstop import _kernels_np as _backend

    BACKEND = "fallback"

csr_matvec = _backend.csr_matvec
csr_matmat = _backend.csr_matmat
