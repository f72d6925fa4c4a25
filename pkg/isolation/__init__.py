"""
isolation/__init__.py
isolation/precondition.py — Normalisation, peak picking, spline upper envelope, centering
isolation/clustering.py   — Threshold clustering and the regularity score
isolation/selector.py     — Band scoring, isolation set, BPM
"""
