"""Exact invariants of class VII surface data."""
