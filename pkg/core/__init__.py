"""
Core processing modules for the rough-set gene selection toolkit.

This package contains the decision-table handling, rough-set reduction,
clustering, classification and evaluation logic, plus the pipeline that
ties them together.
"""
