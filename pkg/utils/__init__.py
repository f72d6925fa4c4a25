"""utils — shared helpers (logging, exceptions)"""
