"""Work-pool jobs. Each job logs its own failure and hands the exception back to the pipeline."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

from quenchopt.models import LandscapeScan, SweepPoint

if TYPE_CHECKING:
    from quenchopt.core.experiment import LandscapeConfig, SweepConfig
    from quenchopt.services.pipeline import ExperimentPipeline

logger = logging.getLogger(__name__)


def sweep_point_job(pipeline: ExperimentPipeline, n_spins: int, tau: float, cfg: SweepConfig) -> SweepPoint | Exception:
    try:
        point = pipeline.sweep_point(n_spins, tau, cfg)
        logger.info("Sweep point N=%d tau=%.4g done: rho*=%.4e, rho_lin=%.4e, r*=%.4g",
                    n_spins, tau, point.density_optimized, point.density_linear, point.r_star)
        return point
    except Exception as exc:
        logger.exception("Sweep point N=%d tau=%.4g failed.", n_spins, tau)
        return exc


def landscape_job(pipeline: ExperimentPipeline, tau: float, cfg: LandscapeConfig) -> LandscapeScan | Exception:
    try:
        return pipeline.landscape(tau, cfg)
    except Exception as exc:
        logger.exception("Landscape scan N=%d tau=%.4g failed.", cfg.n_spins, tau)
        return exc
