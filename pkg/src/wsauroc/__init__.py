"""Severity-aware evaluation of anomaly detectors (WS-AUROC) with a reference detector."""

__version__ = "0.1.0"
