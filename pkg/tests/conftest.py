import json

import pytest


@pytest.fixture
def sample_record() -> dict:
    """A Yelp-shaped business record with pre-joined tips."""
    return {
        "business_id": "oaboaRBUgGjbo2kfUIKDLQ",
        "name": "Mike's Ice Cream",
        "address": "129 2nd Ave N",
        "city": "Nashville",
        "state": "TN",
        "latitude": 36.162649,
        "longitude": -86.775973,
        "stars": 1.5,
        "tip_count": 10,
        "is_open": 1,
        "categories": "Ice Cream & Frozen Yogurt, Fast Food",
        "hours": {"Monday": "0:0-0:0", "Tuesday": "6:0-21:0"},
        "tips": ["Amazing ice cream! So creamy", "Long line but worth it"],
    }


@pytest.fixture
def sample_line(sample_record) -> str:
    return json.dumps(sample_record)
