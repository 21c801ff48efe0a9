"""Configuration management for the texture lesion classifier"""

import os
from typing import Any

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

VALID_COG_MODES = ["intensity", "geometric"]
VALID_FEATURE_STORES = ["tsv", "sqlite"]


def validate_positive_int(name: str, value: str) -> int:
    """Parse a strictly positive integer setting"""
    try:
        parsed = int(value)
    except ValueError:
        raise ValueError(f"Invalid {name} '{value}': must be an integer")
    if parsed < 1:
        raise ValueError(f"Invalid {name} '{value}': must be at least 1")
    return parsed


def validate_levels(value: str) -> int:
    """Validate the GLCM gray level count"""
    levels = validate_positive_int("GLCM_LEVELS", value)
    if levels < 2 or levels > 256:
        raise ValueError(f"Invalid GLCM_LEVELS '{value}': must be between 2 and 256")
    return levels


def validate_ratio(value: str) -> float:
    """Validate the train fraction of the stratified split"""
    try:
        ratio = float(value)
    except ValueError:
        raise ValueError(f"Invalid TRAIN_RATIO '{value}': must be a number")
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"Invalid TRAIN_RATIO '{value}': must lie strictly between 0 and 1")
    return ratio


def validate_tolerance(value: str) -> float:
    try:
        tolerance = float(value)
    except ValueError:
        raise ValueError(f"Invalid SVM_TOLERANCE '{value}': must be a number")
    if tolerance <= 0:
        raise ValueError(f"Invalid SVM_TOLERANCE '{value}': must be positive")
    return tolerance


def load_config() -> dict[str, Any] | None:
    """Load classifier configuration from environment variables"""
    try:
        descriptor_settings = {
            "glcm_levels": validate_levels(os.getenv("GLCM_LEVELS", "16")),
            "glcm_distance": validate_positive_int(
                "GLCM_DISTANCE", os.getenv("GLCM_DISTANCE", "1")
            ),
            "spectral_coefficients": validate_positive_int(
                "SPECTRAL_COEFFICIENTS", os.getenv("SPECTRAL_COEFFICIENTS", "64")
            ),
            "cog_mode": os.getenv("COG_MODE", "intensity").lower(),
        }

        folds = validate_positive_int("CV_FOLDS", os.getenv("CV_FOLDS", "5"))
        if folds < 2:
            raise ValueError(f"Invalid CV_FOLDS '{folds}': need at least 2 folds")

        svm_settings = {
            "folds": folds,
            "tolerance": validate_tolerance(os.getenv("SVM_TOLERANCE", "1e-3")),
            "max_iter": validate_positive_int(
                "SVM_MAX_ITER", os.getenv("SVM_MAX_ITER", "100000")
            ),
            "kernel_cache_mb": validate_positive_int(
                "KERNEL_CACHE_MB", os.getenv("KERNEL_CACHE_MB", "256")
            ),
            "scale_features": os.getenv("FEATURE_SCALING", "true").lower() == "true",
        }

        pipeline_settings = {
            "working_size": validate_positive_int(
                "WORKING_SIZE", os.getenv("WORKING_SIZE", "144")
            ),
            "train_ratio": validate_ratio(os.getenv("TRAIN_RATIO", "0.8")),
            "seed": int(os.getenv("RANDOM_SEED", "7")),
            "max_workers": validate_positive_int(
                "MAX_WORKERS", os.getenv("MAX_WORKERS", "4")
            ),
            "feature_store": os.getenv("FEATURE_STORE", "tsv").lower(),
        }
    except ValueError as e:
        print(f"❌ {e}")
        return None

    if descriptor_settings["cog_mode"] not in VALID_COG_MODES:
        print(
            f"❌ Invalid COG_MODE: {descriptor_settings['cog_mode']}. "
            f"Valid options: {', '.join(VALID_COG_MODES)}"
        )
        return None

    if pipeline_settings["feature_store"] not in VALID_FEATURE_STORES:
        print(
            f"❌ Invalid FEATURE_STORE: {pipeline_settings['feature_store']}. "
            f"Valid options: {', '.join(VALID_FEATURE_STORES)}"
        )
        return None

    return {
        "descriptor_settings": descriptor_settings,
        "svm_settings": svm_settings,
        "pipeline_settings": pipeline_settings,
    }


DEFAULT_DESCRIPTOR_SETTINGS: dict[str, Any] = {
    "glcm_levels": 16,
    "glcm_distance": 1,
    "spectral_coefficients": 64,
    "cog_mode": "intensity",
}

DEFAULT_SVM_SETTINGS: dict[str, Any] = {
    "folds": 5,
    "tolerance": 1e-3,
    "max_iter": 100000,
    "kernel_cache_mb": 256,
    "scale_features": True,
}

DEFAULT_PIPELINE_SETTINGS: dict[str, Any] = {
    "working_size": 144,
    "train_ratio": 0.8,
    "seed": 7,
    "max_workers": 4,
    "feature_store": "tsv",
}


def get_descriptor_config(config: dict[str, Any] | None) -> dict[str, Any]:
    """Extract descriptor defaults from config"""
    if not config:
        return dict(DEFAULT_DESCRIPTOR_SETTINGS)
    return config.get("descriptor_settings", dict(DEFAULT_DESCRIPTOR_SETTINGS))


def get_svm_config(config: dict[str, Any] | None) -> dict[str, Any]:
    """Extract SVM solver settings from config"""
    if not config:
        return dict(DEFAULT_SVM_SETTINGS)
    return config.get("svm_settings", dict(DEFAULT_SVM_SETTINGS))


def get_pipeline_config(config: dict[str, Any] | None) -> dict[str, Any]:
    """Extract pipeline settings from config"""
    if not config:
        return dict(DEFAULT_PIPELINE_SETTINGS)
    return config.get("pipeline_settings", dict(DEFAULT_PIPELINE_SETTINGS))
