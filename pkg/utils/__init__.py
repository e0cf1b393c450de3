"""
Utility modules for the rough-set gene selection toolkit.

This package contains helpers for seed derivation, artifact writing and
run-manifest bookkeeping.
"""
