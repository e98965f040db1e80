"""Data models package initialization."""
