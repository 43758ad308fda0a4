"""HTTP service wrapping the core simulator (FastAPI + pydantic models)."""

from . import runners, schemas

__all__ = ["runners", "schemas"]
