"""
Resilience patterns used by network backends.
"""

from .patterns import Bulkhead, BulkheadConfig, Retry, exponential_backoff

__all__ = ["Bulkhead", "BulkheadConfig", "Retry", "exponential_backoff"]
