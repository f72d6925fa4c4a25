"""
envelopes/__init__.py
envelopes/bands.py — Subband split of |S| and per-band onset envelopes
"""
