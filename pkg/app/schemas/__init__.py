"""Pydantic schemas package initialization."""
