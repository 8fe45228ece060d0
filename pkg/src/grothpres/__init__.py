"""Definable sets over Z-groups: canonical classes, counting, and bijection decisions."""

__version__ = "0.1.0"
