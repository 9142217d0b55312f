"""VR traffic classification toolkit: feature extraction, classifiers,
and the downlink scheduling simulator, backed by the C++ core."""

try:
    # installed layout: the extension lives inside the package
    from ._core import (
        VrtcContractError,
        VrtcIoError,
        VrtcParseError,
        __version__,
        extract_dataset,
        feature_names,
        pearson_cc,
        predict,
        simulate,
        train,
    )
except ImportError:
    # build-tree layout: the extension sits on PYTHONPATH next to the build
    from _core import (
        VrtcContractError,
        VrtcIoError,
        VrtcParseError,
        __version__,
        extract_dataset,
        feature_names,
        pearson_cc,
        predict,
        simulate,
        train,
    )

__all__ = [
    "VrtcContractError",
    "VrtcIoError",
    "VrtcParseError",
    "__version__",
    "extract_dataset",
    "feature_names",
    "pearson_cc",
    "predict",
    "simulate",
    "train",
]
