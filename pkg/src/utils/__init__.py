"""
Utility functions and helpers for the aggregation engine.

utils.loaders depends on numeric and is imported directly, not re-exported here.
"""

from utils.errors import (
    AggregationError,
    ConfigError,
    InputFormatError,
    NumericError,
    UsageError,
    ValidationError,
)
from utils.logging_utils import get_logger, log_message, setup_logging
from utils.schemas import RunConfig

__all__ = [
    'AggregationError',
    'ConfigError',
    'InputFormatError',
    'NumericError',
    'UsageError',
    'ValidationError',
    'get_logger',
    'log_message',
    'setup_logging',
    'RunConfig',
]
