"""
Tests for the public surface of coarse_grain.__init__.
"""

import importlib
import importlib.metadata
import sys

import coarse_grain
from coarse_grain.core.interfaces import RecordExporter, RecordSampler
from coarse_grain.experiments.harness import SeededStateSampler
from coarse_grain.storage.exporter import CsvRecordExporter, JsonRecordExporter


def test_public_names_resolve():
    for name in coarse_grain.__all__:
        assert getattr(coarse_grain, name) is not None, name


def test_top_level_api():
    sc = coarse_grain.get_scenario(2)
    gamma = coarse_grain.petz_emergent(sc.unitary(1.0), sc.cg, coarse_grain.make_generator("MM"))
    assert gamma.dim_in == 2 and gamma.dim_out == 2
    assert coarse_grain.is_cptp(coarse_grain.kraus_to_choi(gamma))


def test_version_fallback(monkeypatch):
    def _missing(name):
        raise importlib.metadata.PackageNotFoundError(name)

    monkeypatch.setattr(importlib.metadata, "version", _missing)
    sys.modules.pop("coarse_grain", None)
    try:
        mod = importlib.import_module("coarse_grain")
        assert mod.__version__ == "0.0.0.dev"
    finally:
        sys.modules["coarse_grain"] = coarse_grain


def test_plugin_classes_implement_interfaces():
    assert RecordExporter in CsvRecordExporter.__mro__
    assert RecordExporter in JsonRecordExporter.__mro__
    assert RecordSampler in SeededStateSampler.__mro__
