"""FastAPI wrapper for the safe policy improvement toolkit.

- /: health check
- /benchmarks: benchmark defaults from the versioned config file
- /sweep: run a dataset-size sweep and return records plus aggregates

Run with: python -m api or uvicorn api:app --host 0.0.0.0 --port 8000
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from config import BENCHMARKS, RESULTS_DIR, ensure_output_dirs
from models import ExperimentConfig, InvalidInputError, RunRecord

# Solver and environment modules are imported inside endpoints to keep module import lightweight

logger = logging.getLogger(__name__)

app = FastAPI(title="Safe SPI Shield API")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:5173"],
    allow_origin_regex=r"^https?://localhost:\d{4}$",
    allow_credentials=False,
    allow_methods=["*"],
    allow_headers=["*"],
)

ensure_output_dirs()


class SweepResponse(BaseModel):
    records: List[RunRecord]
    aggregates: List[Dict[str, Any]]


@app.get("/")
def root():
    return {"message": "Safe SPI Shield API is running."}


@app.get("/benchmarks")
async def benchmarks():
    """Default hyperparameters per benchmark."""
    return BENCHMARKS


def _inside_results(path: Optional[str]) -> Optional[str]:
    """Resolve a client-supplied output path under RESULTS_DIR; 400 if it escapes."""
    if not path:
        return None
    root = Path(RESULTS_DIR).resolve()
    target = (root / path).resolve()
    if not target.is_relative_to(root):
        raise HTTPException(status_code=400, detail=f"output path {path!r} must stay inside {RESULTS_DIR}")
    target.parent.mkdir(parents=True, exist_ok=True)
    return str(target)


@app.post("/sweep", response_model=SweepResponse)
def sweep(config: ExperimentConfig):
    """Run a sweep synchronously. Output paths are taken relative to the results folder."""
    from envs import BENCHMARK_BUILDERS
    from harness import aggregate, run_sweep, write_results

    if config.env not in BENCHMARK_BUILDERS:
        raise HTTPException(status_code=400, detail=f"unknown benchmark {config.env!r}")
    config = config.model_copy(update={
        "output": _inside_results(config.output),
        "json_output": _inside_results(config.json_output),
        "dump_shield": _inside_results(config.dump_shield),
    })
    try:
        records = run_sweep(config)
        write_results(records, config)
    except InvalidInputError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error running sweep: {e}")
        raise HTTPException(status_code=500, detail=str(e))
    return SweepResponse(records=records, aggregates=aggregate(records))


# Simple uvicorn runner convenience
if __name__ == "__main__":
    import uvicorn
    uvicorn.run("api:app", host="0.0.0.0", port=8000, reload=False)
