"""
evalkit/__init__.py
evalkit/metrics.py — Accuracy 1 / Accuracy 2
evalkit/dataset.py — Ground-truth manifests and annotation importers
evalkit/synth.py   — Synthetic click tracks at known tempi
evalkit/harness.py — Dataset evaluation and reports
"""
