"""ASI-SSP IMEX - Services Package

Supporting services used by the analysis modules:
- Reference trajectory cache (memory + disk)
- Marching squares contour extraction
- SVG plotting
"""
