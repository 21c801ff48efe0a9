#!/usr/bin/env python3
"""
Test suite for configuration, report rendering, the synthetic corpus and the CLI
"""

import argparse
import json
import os
import sys
from unittest.mock import patch

import numpy as np
import pytest

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.config import (
    DEFAULT_DESCRIPTOR_SETTINGS,
    DEFAULT_PIPELINE_SETTINGS,
    DEFAULT_SVM_SETTINGS,
    get_descriptor_config,
    get_pipeline_config,
    get_svm_config,
    load_config,
)
from src.imgio import load_image
from src.pipeline import load_manifest
from src.regions import dimension_ledger
from src.report_generator import (
    generate_dimension_ledger,
    generate_eval_report,
    generate_grid_report,
    save_report,
)
from src.synthetic import FAMILIES, MANIFEST_NAME, generate_corpus, sample
from src.types import ConfigEcho, EvalReport, GridCell
from texture_lesion_classifier import build_parser, main, parse_exponents


@pytest.fixture
def sample_report():
    """Two-class report with a cross-validation score"""
    return EvalReport(
        accuracy=0.75,
        classes=["Leprosy", "Vitiligo"],
        confusion=[[2, 1], [0, 1]],
        per_class={
            "Leprosy": {"precision": 1.0, "recall": 2 / 3, "support": 3},
            "Vitiligo": {"precision": 0.5, "recall": 1.0, "support": 1},
        },
        config=ConfigEcho(descriptor="cogriWeberLBP@16,2", C=8.0, gamma=0.125, seed=7, cv_accuracy=0.9),
        train_count=16,
        test_count=4,
    )


@pytest.fixture
def small_env():
    """Environment for quick command-line runs"""
    with patch.dict(os.environ, {"WORKING_SIZE": "48", "MAX_WORKERS": "2", "RANDOM_SEED": "3"}):
        yield


class TestConfiguration:
    """Test configuration loading and validation"""

    @patch.dict(os.environ, {}, clear=True)
    def test_defaults(self):
        config = load_config()

        assert config is not None
        assert config["descriptor_settings"] == DEFAULT_DESCRIPTOR_SETTINGS
        assert config["svm_settings"] == DEFAULT_SVM_SETTINGS
        assert config["pipeline_settings"] == DEFAULT_PIPELINE_SETTINGS

    @patch.dict(
        os.environ,
        {
            "GLCM_LEVELS": "8",
            "COG_MODE": "Geometric",
            "CV_FOLDS": "10",
            "FEATURE_SCALING": "false",
            "TRAIN_RATIO": "0.75",
            "RANDOM_SEED": "123",
            "FEATURE_STORE": "SQLite",
        },
        clear=True,
    )
    def test_overrides(self):
        config = load_config()

        assert config is not None
        assert config["descriptor_settings"]["glcm_levels"] == 8
        assert config["descriptor_settings"]["cog_mode"] == "geometric"
        assert config["svm_settings"]["folds"] == 10
        assert not config["svm_settings"]["scale_features"]
        assert config["pipeline_settings"]["train_ratio"] == 0.75
        assert config["pipeline_settings"]["seed"] == 123
        assert config["pipeline_settings"]["feature_store"] == "sqlite"

    @pytest.mark.parametrize(
        "key,value",
        [
            ("GLCM_LEVELS", "1"),
            ("GLCM_LEVELS", "300"),
            ("GLCM_DISTANCE", "0"),
            ("TRAIN_RATIO", "1.5"),
            ("TRAIN_RATIO", "most"),
            ("CV_FOLDS", "1"),
            ("SVM_TOLERANCE", "-1"),
            ("MAX_WORKERS", "abc"),
            ("COG_MODE", "median"),
            ("FEATURE_STORE", "parquet"),
        ],
    )
    def test_invalid_values(self, key, value, capsys):
        with patch.dict(os.environ, {key: value}, clear=True):
            assert load_config() is None
        assert "❌" in capsys.readouterr().out

    def test_getters_fall_back_to_defaults(self):
        assert get_descriptor_config(None) == DEFAULT_DESCRIPTOR_SETTINGS
        assert get_svm_config({}) == DEFAULT_SVM_SETTINGS
        assert get_pipeline_config({"svm_settings": {}}) == DEFAULT_PIPELINE_SETTINGS

        settings = get_pipeline_config(None)
        settings["seed"] = 99
        assert DEFAULT_PIPELINE_SETTINGS["seed"] == 7


class TestReports:
    """Text and JSON rendering"""

    def test_evaluation_report(self, sample_report):
        text = generate_eval_report(sample_report)

        assert "📊 TEXTURE CLASSIFICATION REPORT" in text
        assert "Descriptor: cogriWeberLBP@16,2" in text
        assert "SVM: C=2^3 gamma=2^-3 | seed 7" in text
        assert "Cross-validation accuracy: 90.00%" in text
        assert "🎯 Test accuracy: 75.00%" in text
        assert "Train images: 16 | Test images: 4" in text
        assert "recall 0.667" in text

    def test_evaluation_report_without_cross_validation(self, sample_report):
        sample_report["config"]["cv_accuracy"] = None
        sample_report["config"]["C"] = 3.0

        text = generate_eval_report(sample_report)

        assert "Cross-validation" not in text
        assert "C=3 " in text

    def test_grid_report_ranks_best_first(self):
        cells = [
            GridCell(C=2.0, gamma=0.5, cv_accuracy=0.8),
            GridCell(C=8.0, gamma=0.5, cv_accuracy=0.95),
            GridCell(C=0.5, gamma=0.5, cv_accuracy=0.95),
        ]

        lines = generate_grid_report(cells).splitlines()

        assert "Cells evaluated: 3" in lines
        assert lines[4] == "🥇 C=2^-1 gamma=2^-1 -> 95.00%"
        assert lines[5].startswith("2. C=2^3")
        assert lines[6].startswith("3. C=2^1")

    def test_dimension_ledger_flags_discrepancies(self):
        text = generate_dimension_ledger(dimension_ledger())

        assert "117 -> 107*" in text
        assert "4044 -> 4004*" in text
        assert "⚠️ 4 entries differ" in text
        for group in range(1, 9):
            assert f"Group {group}" in text

    def test_save_json_report(self, sample_report, tmp_path):
        path = save_report(sample_report, tmp_path / "out" / "report.json")

        with open(path, encoding="utf-8") as f:
            loaded = json.load(f)
        assert loaded == sample_report

    def test_save_text_report(self, sample_report, tmp_path):
        path = save_report(sample_report, tmp_path / "report.txt")

        with open(path, encoding="utf-8") as f:
            assert "🎯 Test accuracy: 75.00%" in f.read()


class TestSyntheticCorpus:
    """Seeded texture families"""

    @pytest.mark.parametrize("family", FAMILIES)
    def test_sample_is_deterministic(self, family):
        first = sample(family, 4, size=32, seed=1)
        again = sample(family, 4, size=32, seed=1)
        other = sample(family, 5, size=32, seed=1)

        assert first.pixels.shape == (32, 32)
        assert np.array_equal(first.pixels, again.pixels)
        assert not np.array_equal(first.pixels, other.pixels)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            sample("marble", 0)

    def test_corpus_layout(self, tmp_path):
        manifest = generate_corpus(tmp_path, per_class=2, size=24, seed=3, families=("noise", "grating"))

        reloaded = load_manifest(tmp_path / MANIFEST_NAME)
        assert reloaded == manifest
        assert manifest.labels == ["noise", "noise", "grating", "grating"]
        assert load_image(manifest.paths[0]).pixels.shape == (24, 24)
        assert np.array_equal(load_image(manifest.paths[3]).pixels, sample("grating", 1, 24, 3).pixels)

    def test_needs_one_image_per_class(self, tmp_path):
        with pytest.raises(ValueError):
            generate_corpus(tmp_path, per_class=0)


class TestCommandLine:
    """Exit codes and end-to-end subcommands"""

    def test_parse_exponents(self):
        assert parse_exponents("-1:3:2") == (0.5, 2.0, 8.0)
        assert parse_exponents("3:-1:-2") == (8.0, 2.0, 0.5)
        assert parse_exponents("1:1:1") == (2.0,)
        for text in ["1:0:1", "1:5:0", "a:b:c", "1:2"]:
            with pytest.raises(argparse.ArgumentTypeError):
                parse_exponents(text)

    def test_negative_exponent_ranges_attach_with_equals(self):
        args = build_parser(7).parse_args(
            ["grid-search", "--features", "f.tsv", "--c-exponents=-1:1:2", "--gamma-exponents=-3:-1:2"]
        )

        assert args.c_exponents == (0.5, 2.0)
        assert args.gamma_exponents == (0.125, 0.5)
        assert args.seed == 7

    def test_grid_defaults(self):
        args = build_parser(7).parse_args(["grid-search", "--features", "f.tsv"])

        assert args.c_exponents[0] == 2.0**-5
        assert args.gamma_exponents[-1] == 2.0**3
        assert args.folds is None

    def test_dims(self, capsys):
        assert main(["dims"]) == 0
        assert "1011 -> 1001*" in capsys.readouterr().out

    def test_invalid_configuration_exits_nonzero(self, capsys):
        with patch.dict(os.environ, {"GLCM_LEVELS": "300"}):
            assert main(["dims"]) == 2
        assert "GLCM_LEVELS" in capsys.readouterr().out

    def test_missing_model(self, tmp_path, capsys):
        assert main(["predict", "--model", str(tmp_path / "none.txt"), "--image", "x.png"]) == 1
        assert "❌ Model file not found" in capsys.readouterr().out

    def test_bad_descriptor(self, tmp_path, capsys):
        code = main(["extract", "--manifest", str(tmp_path / "m.csv"), "--descriptor", "HOG@8,1", "--out", "f.tsv"])

        assert code == 1
        assert "❌" in capsys.readouterr().out

    def test_train_needs_input(self, tmp_path, capsys):
        assert main(["train", "--model-out", str(tmp_path / "m.txt")]) == 1
        assert "needs --features" in capsys.readouterr().out

    def test_extract_train_predict_evaluate(self, tmp_path, small_env, capsys):
        corpus = tmp_path / "corpus"
        features = tmp_path / "features.tsv"
        model = tmp_path / "model.txt"
        report = tmp_path / "report.json"
        manifest = str(corpus / MANIFEST_NAME)
        grid = ["--c-exponents=1:3:2", "--gamma-exponents=-3:-1:2", "--folds", "2"]

        assert main(["synth", "--out", str(corpus), "--per-class", "6", "--size", "48"]) == 0
        assert main(["--quiet", "extract", "--manifest", manifest, "--descriptor", "riLBP@8,1", "--out", str(features)]) == 0
        assert main(["train", "--features", str(features), "--model-out", str(model), *grid]) == 0
        assert main(["--quiet", "predict", "--model", str(model), "--manifest", manifest]) == 0
        assert main(["--quiet", "evaluate", "--model", str(model), "--manifest", manifest, "--report-out", str(report)]) == 0
        image = load_manifest(manifest).paths[0]
        assert main(["predict", "--model", str(model), "--image", image]) == 0

        out = capsys.readouterr().out
        assert "✅ Wrote 24 feature rows" in out
        assert out.strip().splitlines()[-1].split("\t")[1] in FAMILIES
        with open(report, encoding="utf-8") as f:
            saved = json.load(f)
        assert saved["test_count"] == 24
        assert saved["config"]["descriptor"] == "riLBP@8,1"
        assert saved["config"]["seed"] == 3
        assert saved["config"]["cv_accuracy"] is None

    def test_grid_search_and_protocol(self, tmp_path, small_env, capsys):
        corpus = tmp_path / "corpus"
        features = tmp_path / "features.db"
        report = tmp_path / "report.json"
        manifest = str(corpus / MANIFEST_NAME)
        grid = ["--c-exponents=1:1:1", "--gamma-exponents=-3:-1:2", "--folds", "2"]

        assert main(["synth", "--out", str(corpus), "--per-class", "6", "--size", "48"]) == 0
        assert main(["--quiet", "extract", "--manifest", manifest, "--descriptor", "DCT:8", "--out", str(features)]) == 0
        assert main(["grid-search", "--features", str(features), "--descriptor", "DCT:8", *grid]) == 0
        assert main(["--quiet", "protocol", "--manifest", manifest, "--descriptor", "DCT:8", "--report-out", str(report), *grid]) == 0

        out = capsys.readouterr().out
        assert "Cells evaluated: 2" in out
        assert "✅ Best: C=2" in out
        with open(report, encoding="utf-8") as f:
            saved = json.load(f)
        assert (saved["train_count"], saved["test_count"]) == (20, 4)
        assert saved["config"]["C"] == 2.0
