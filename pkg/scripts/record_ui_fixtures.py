#!/usr/bin/env python3
"""Re-record the API payload fixtures used by the frontend component tests.

Runs the planted-support synthetic dataset through the real service and dumps
the exact response bytes into frontend/tests/fixtures/.
"""

import json
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fastapi.testclient import TestClient

from factorlens.data import save_dataset
from factorlens.service import ServiceConfig, create_app
from factorlens.synthetic import SyntheticConfig, generate_synthetic


def main() -> int:
    out = Path(__file__).resolve().parents[1] / "frontend" / "tests" / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    cfg = SyntheticConfig(
        n_stocks=10, n_sectors=2, n_days=330, n_factors=20, sparsity=3,
        noise_sigma=0.01, seed=409, weight_magnitude=0.05, shared_support=True,
    )
    dataset, planted = generate_synthetic(cfg)
    with tempfile.TemporaryDirectory() as tmp:
        save_dataset(dataset, tmp)
        csvs = {
            f"{name}_csv": (Path(tmp) / f"{name}.csv").read_text()
            for name in ("prices", "factors", "sectors")
        }
        app = create_app(
            ServiceConfig(train_days=200, cycle_days=21, horizon=63),
            tmp_dir=Path(tmp) / "svc",
        )
        client = TestClient(app)

        r = client.post("/api/datasets", json=csvs)
        assert r.status_code == 201, r.text
        dataset_id = r.json()["dataset_id"]
        (out / "dataset.json").write_bytes(r.content)

        start = dataset.calendar.date_of(201).isoformat()
        end = dataset.calendar.date_of(263).isoformat()
        r = client.post(
            "/api/analysis",
            json={
                "dataset_id": dataset_id,
                "stock_ids": list(dataset.stock_ids()),
                "period": {"start_date": start, "end_date": end},
                "variant": "lasso",
                "with_sensitivity": True,
            },
        )
        assert r.status_code == 200, r.text
        (out / "analysis.json").write_bytes(r.content)

        support = list(planted.stocks[dataset.stock_ids()[0]].support)
        r = client.post(
            "/api/backtest",
            json={
                "dataset_id": dataset_id,
                "specs": [
                    {
                        "name": "planted-only",
                        "stock_ids": list(dataset.stock_ids()),
                        "factor_ids": support,
                        "period": {"start_date": start, "end_date": end},
                        "variant": "lasso",
                        "horizon": 63,
                    }
                ],
            },
        )
        assert r.status_code == 200, r.text
        (out / "backtest.json").write_bytes(r.content)
        (out / "factors.json").write_bytes(client.get("/api/factors").content)
        (out / "meta.json").write_text(
            json.dumps(
                {
                    "dataset_id": dataset_id,
                    "start_date": start,
                    "end_date": end,
                    "planted_support": support,
                    "stock_ids": list(dataset.stock_ids()),
                },
                indent=1,
            )
        )
    print(f"fixtures written to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
