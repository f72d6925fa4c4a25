"""
tfr/__init__.py
tfr/stransform.py — Normalised DFT and the absolute discrete S-transform
"""
