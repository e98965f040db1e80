"""API endpoints package initialization."""
