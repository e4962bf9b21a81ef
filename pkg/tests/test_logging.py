"""Tests for the loguru setup."""
import logging

import pytest
from loguru import logger as loguru_logger

from app.log.logging import InterceptHandler


@pytest.fixture
def captured():
    records = []
    sink_id = loguru_logger.add(lambda message: records.append(message.record), level=0)
    yield records
    loguru_logger.remove(sink_id)


class TestInterceptHandler:
    """Tests for routing stdlib records into loguru."""

    def test_stdlib_record_reaches_loguru(self, captured):
        """Test that a stdlib warning arrives with its level and message."""
        record = logging.LogRecord("scipy.integrate", logging.WARNING, __file__, 1,
                                   "subdivision limit %d reached", (50,), None)

        InterceptHandler().emit(record)

        assert captured[-1]["level"].name == "WARNING"
        assert captured[-1]["message"] == "subdivision limit 50 reached"

    def test_unknown_level_name_keeps_number(self, captured):
        """Test that a level loguru does not know is logged by number."""
        record = logging.LogRecord("third.party", 25, __file__, 1, "custom level", None, None)
        record.levelname = "NOTICE"

        InterceptHandler().emit(record)

        assert captured[-1]["level"].no == 25
        assert captured[-1]["message"] == "custom level"
