"""
fscan - parallel aggregation of sequences and images through functors out of
interval and rectangle categories.

Modules import one another by top-level name; run from src/ or put src/ on
sys.path (tests/conftest.py does).
"""

__version__ = '0.2.0'
