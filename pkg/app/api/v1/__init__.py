"""API version 1 package initialization."""
