"""
Entry point for running the job service under uvicorn.
"""

import logging

import uvicorn

logger = logging.getLogger(__name__)

APP_PATH = "gpcpd.api.main:app"


def run_api(host: str = "127.0.0.1", port: int = 8000, reload: bool = False,
            log_level: str = "info") -> None:
    """Serve ``gpcpd.api.main:app``; blocks until uvicorn exits."""
    logger.info("Starting job service on %s:%d (reload=%s)", host, port, reload)
    uvicorn.run(APP_PATH, host=host, port=port, reload=reload, log_level=log_level)


if __name__ == "__main__":
    run_api(reload=True)
