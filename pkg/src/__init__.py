"""ASI-SSP IMEX - Core Package

This package contains the core modules:
- Tableau data model and scheme catalog (tableau.py, tableaux.py)
- Order conditions (order_conditions.py)
- IMEX stepper and test problems (integrator.py, problems.py)
- Stability regions and absolute monotonicity (stability.py, monotonicity.py)
- Convergence experiments and acceptance checks (experiments.py, acceptance.py)
- CLI interface (main.py)
"""
