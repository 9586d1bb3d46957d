"""quenchopt: optimal transverse-field quenches of the quantum Ising chain."""

from __future__ import annotations

__version__ = "1.0.0"


def run(argv: list[str] | None = None) -> None:
    """Entry point: load settings, build the CLI, dispatch the subcommand."""
    import logging
    from quenchopt.application import create_application
    from quenchopt.core.config import get_settings

    settings = get_settings()
    _setup_logging(settings.log_level)

    logger = logging.getLogger("quenchopt")

    args = create_application(settings).parse_args(argv)
    logger.info("quenchopt %s: %s", __version__, args.command)
    raise SystemExit(args.handler(args, settings))


def _setup_logging(level: str) -> None:
    import logging

    level = (level or "INFO").strip().upper()
    numeric = getattr(logging, level, logging.INFO)
    logging.basicConfig(
        level=numeric,
        format="%(asctime)s | %(levelname)-8s | %(name)-25s | %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
