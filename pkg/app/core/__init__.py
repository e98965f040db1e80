"""Core functionality package initialization."""
