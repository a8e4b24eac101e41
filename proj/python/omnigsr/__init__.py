"""Scanpath-driven GSR conversion and full-reference metrics for 360-degree images.

Images are HxWx3 uint8 numpy arrays in equirectangular layout.
"""

from ._omnigsr import (
    ConfigError,
    DomainError,
    FormatError,
    GsrSequence,
    PairingError,
    ScanpathSet,
    convert,
    evaluate,
    generate_scanpaths,
    load_scanpaths,
    make_splits,
    plcc,
    pool,
    psnr,
    read_gsr,
    read_png,
    s_psnr,
    scanpaths_from_points,
    score,
    srcc,
    ssim,
    write_png,
    ws_psnr,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "FormatError",
    "GsrSequence",
    "PairingError",
    "ScanpathSet",
    "convert",
    "evaluate",
    "generate_scanpaths",
    "load_scanpaths",
    "make_splits",
    "plcc",
    "pool",
    "psnr",
    "read_gsr",
    "read_png",
    "s_psnr",
    "scanpaths_from_points",
    "score",
    "srcc",
    "ssim",
    "write_png",
    "ws_psnr",
]
