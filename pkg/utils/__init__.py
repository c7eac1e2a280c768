"""ASI-SSP IMEX - Utilities Package

This package contains utility modules:
- Input validators (grid specs, family parameters, coefficient strings)
- CLI UI helpers (output modes, 17-digit number formatting)
- Run configuration echo (run-config.json)
"""
