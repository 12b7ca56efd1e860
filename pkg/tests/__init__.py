"""
DGBO test suite.
"""
