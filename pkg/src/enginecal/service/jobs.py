"""In-process campaign runner and result store.

Campaigns run synchronously in the request: the oracle is stateful and the
loop is sequential, so there is nothing to gain from a worker pool.
"""
from __future__ import annotations

import itertools
import threading
from typing import Any, Optional

from enginecal.campaign import CampaignResult, resume_campaign, run_campaign, run_uniform_baseline
from enginecal.config import CampaignConfig, load_campaign_config


def make_config(config: str | dict[str, Any], seed: Optional[int] = None,
                budget: Optional[int] = None) -> CampaignConfig:
    overrides = {"seed": seed, "budget": budget}
    if isinstance(config, dict):
        data = dict(config)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return CampaignConfig.model_validate(data)
    return load_campaign_config(config, **overrides)


class JobStore:
    def __init__(self):
        self._lock = threading.Lock()
        self._ids = itertools.count(1)
        self._results: dict[str, tuple[CampaignResult, Optional[str]]] = {}

    def _keep(self, result: CampaignResult, out_dir: Optional[str]) -> str:
        with self._lock:
            job = f"c{next(self._ids)}"
            self._results[job] = (result, out_dir)
        return job

    def run(self, config: CampaignConfig, mode: str = "adaptive",
            out_dir: Optional[str] = None) -> tuple[str, CampaignResult]:
        if mode == "adaptive":
            res = run_campaign(config, out_dir)
        else:
            res = run_uniform_baseline(config, out_dir=out_dir)
        return self._keep(res, out_dir), res

    def resume(self, out_dir: str, budget: Optional[int] = None) -> tuple[str, CampaignResult]:
        res = resume_campaign(out_dir, budget)
        return self._keep(res, out_dir), res

    def get(self, job: str) -> tuple[CampaignResult, Optional[str]]:
        with self._lock:
            return self._results[job]
