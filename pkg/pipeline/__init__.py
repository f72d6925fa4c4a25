"""
pipeline/__init__.py
pipeline/runner.py — PipelineConfig and the end-to-end TempoPipeline
"""
