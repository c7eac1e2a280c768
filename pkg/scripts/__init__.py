"""IMEX Toolkit - Scripts Package

This package contains utility scripts:
- Quick smoke test of one scheme on both test problems
"""
