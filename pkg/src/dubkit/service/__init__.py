"""HTTP job service and its on-disk store."""

from dubkit.service.store import JobStore, StoreError

__all__ = ["JobStore", "StoreError"]
