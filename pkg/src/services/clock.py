import os
from datetime import datetime, timezone


def utc_now() -> str:
    """Current UTC time as RFC 3339, pinned to SOURCE_DATE_EPOCH when that is set"""
    epoch = os.environ.get('SOURCE_DATE_EPOCH')
    if epoch:
        moment = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        moment = datetime.now(timezone.utc).replace(microsecond=0)
    return moment.strftime('%Y-%m-%dT%H:%M:%SZ')
