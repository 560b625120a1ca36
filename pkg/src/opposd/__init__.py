"""opposd — batch off-policy policy optimization with state distribution correction."""

__version__ = "0.1.0"
