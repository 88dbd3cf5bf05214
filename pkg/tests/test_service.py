import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from factorlens.artifacts import canonical_json_bytes
from factorlens.data import save_dataset
from factorlens.rolling import partition_cycles, rolling_fit
from factorlens.service import ServiceConfig, create_app
from factorlens.solver import ElasticNetConfig
from factorlens.synthetic import SyntheticConfig, generate_synthetic

CFG = ServiceConfig(train_days=30, cycle_days=10, horizon=5, jobs=1)


@pytest.fixture(scope="module")
def dataset_csvs(tmp_path_factory):
    ds, _ = generate_synthetic(
        SyntheticConfig(
            n_stocks=4, n_sectors=2, n_days=90, n_factors=5, sparsity=2,
            noise_sigma=0.004, seed=21, weight_magnitude=0.02,
        )
    )
    out = tmp_path_factory.mktemp("svc")
    save_dataset(ds, out)
    return {
        "prices_csv": (out / "prices.csv").read_text(),
        "factors_csv": (out / "factors.csv").read_text(),
        "sectors_csv": (out / "sectors.csv").read_text(),
        "dataset": ds,
    }


@pytest.fixture()
def client(tmp_path):
    app = create_app(CFG, tmp_dir=tmp_path / "svc-tmp")
    return TestClient(app)


def post_dataset(client, csvs):
    r = client.post(
        "/api/datasets",
        json={k: csvs[k] for k in ("prices_csv", "factors_csv", "sectors_csv")},
    )
    assert r.status_code == 201, r.text
    return r.json()


def analysis_request(ds, dataset_id, **overrides):
    cal = ds.calendar
    body = {
        "dataset_id": dataset_id,
        "stock_ids": list(ds.stock_ids()[:2]),
        "period": {
            "start_date": cal.date_of(31).isoformat(),
            "end_date": cal.date_of(50).isoformat(),
        },
        "variant": "lasso",
    }
    body.update(overrides)
    return body


class TestHealthAndRegistry:
    def test_healthz(self, client):
        r = client.get("/healthz")
        assert r.status_code == 200
        assert r.json() == {"status": "ok"}

    def test_factors_registry(self, client):
        r = client.get("/api/factors")
        assert r.status_code == 200
        body = r.json()
        assert len(body["factors"]) == 56
        assert body["type_counts"]["Growth"] == 11


class TestDatasets:
    def test_post_and_fetch(self, client, dataset_csvs):
        summary = post_dataset(client, dataset_csvs)
        assert summary["dataset_id"].startswith("ds-")
        assert len(summary["sectors"]) == 2
        assert summary["calendar"]["days"] == 90

        r = client.get(f"/api/datasets/{summary['dataset_id']}")
        assert r.status_code == 200
        assert r.json() == summary

        r = client.get(f"/api/datasets/{summary['dataset_id']}/sectors")
        assert r.status_code == 200
        assert r.json()["sectors"] == summary["sectors"]

    def test_idempotent_content_hash(self, client, dataset_csvs):
        a = post_dataset(client, dataset_csvs)
        b = post_dataset(client, dataset_csvs)
        assert a["dataset_id"] == b["dataset_id"]

    def test_missing_field_is_400(self, client, dataset_csvs):
        r = client.post(
            "/api/datasets", json={"prices_csv": dataset_csvs["prices_csv"]}
        )
        assert r.status_code == 400
        assert r.json()["error"] == "MissingFile"

    def test_malformed_csv_is_400_with_diagnostic(self, client, dataset_csvs):
        bad = dict(
            prices_csv="date,stock_id,close\n2020-01-06,AAA,abc\n",
            factors_csv=dataset_csvs["factors_csv"],
            sectors_csv="stock_id,sector\nAAA,S\n",
        )
        r = client.post("/api/datasets", json=bad)
        assert r.status_code == 400
        assert "row 2" in r.json()["detail"]

    def test_unknown_dataset_404(self, client):
        assert client.get("/api/datasets/ds-nope").status_code == 404


class TestAnalysis:
    def test_happy_path_structure(self, client, dataset_csvs):
        ds = dataset_csvs["dataset"]
        did = post_dataset(client, dataset_csvs)["dataset_id"]
        r = client.post("/api/analysis", json=analysis_request(ds, did))
        assert r.status_code == 200, r.text
        body = r.json()
        assert body["partition"]["n_cycles"] == 2
        assert body["adjustment"]["days_dropped"] == 0
        stocks = {m["stock_id"] for m in body["models"]["models"]}
        assert stocks == set(ds.stock_ids()[:2])
        # every (stock, cycle) appears exactly once
        keys = [(m["stock_id"], m["cycle"]) for m in body["models"]["models"]]
        assert len(keys) == len(set(keys)) == 4
        assert body["metrics"]["stability"]
        assert body["aggregates"]

    def test_period_adjustment_reported(self, client, dataset_csvs):
        ds = dataset_csvs["dataset"]
        did = post_dataset(client, dataset_csvs)["dataset_id"]
        req = analysis_request(ds, did)
        req["period"]["end_date"] = ds.calendar.date_of(53).isoformat()
        r = client.post("/api/analysis", json=req)
        assert r.status_code == 200
        adj = r.json()["adjustment"]
        assert adj["days_dropped"] == 3
        assert adj["effective_end_date"] == ds.calendar.date_of(50).isoformat()

    def test_cache_hit_byte_identical(self, client, dataset_csvs):
        ds = dataset_csvs["dataset"]
        did = post_dataset(client, dataset_csvs)["dataset_id"]
        req = analysis_request(ds, did)
        first = client.post("/api/analysis", json=req)
        second = client.post("/api/analysis", json=req)
        assert first.headers["X-Cache"] == "miss"
        assert second.headers["X-Cache"] == "hit"
        assert first.content == second.content

    def test_fresh_app_reproduces_bytes(self, dataset_csvs, tmp_path):
        bodies = []
        for i in range(2):
            app = create_app(CFG, tmp_dir=tmp_path / f"svc{i}")
            c = TestClient(app)
            ds = dataset_csvs["dataset"]
            did = post_dataset(c, dataset_csvs)["dataset_id"]
            bodies.append(c.post("/api/analysis", json=analysis_request(ds, did)).content)
        assert bodies[0] == bodies[1]

    def test_factor_subset_restricts_weights(self, client, dataset_csvs):
        ds = dataset_csvs["dataset"]
        did = post_dataset(client, dataset_csvs)["dataset_id"]
        subset = [ds.factors.factor_names[0]]
        r = client.post(
            "/api/analysis", json=analysis_request(ds, did, factors=subset)
        )
        assert r.status_code == 200
        for model in r.json()["models"]["models"]:
            for name, _ in model["weights"]:
                assert name in subset

    def test_sector_selection(self, client, dataset_csvs):
        ds = dataset_csvs["dataset"]
        did = post_dataset(client, dataset_csvs)["dataset_id"]
        sector, members = next(iter(ds.sectors.items()))
        r = client.post(
            "/api/analysis",
            json=analysis_request(ds, did, stock_ids=[], sectors=[sector]),
        )
        assert r.status_code == 200
        assert {m["stock_id"] for m in r.json()["models"]["models"]} == set(members)

    def test_with_sensitivity_flag(self, client, dataset_csvs):
        ds = dataset_csvs["dataset"]
        did = post_dataset(client, dataset_csvs)["dataset_id"]
        r = client.post(
            "/api/analysis",
            json=analysis_request(ds, did, with_sensitivity=True,
                                  stock_ids=[ds.stock_ids()[0]]),
        )
        assert r.status_code == 200
        sens = r.json()["metrics"]["sensitivity"]
        assert len(sens) == 2 * len(ds.factors.factor_names)
        assert all(s["sensitivity"] >= 0 for s in sens)

    def test_decomposition_identity_from_payload(self, client, dataset_csvs):
        ds = dataset_csvs["dataset"]
        did = post_dataset(client, dataset_csvs)["dataset_id"]
        r = client.post("/api/analysis", json=analysis_request(ds, did))
        body = r.json()
        contrib = {}
        for imp in body["metrics"]["importance"]:
            contrib.setdefault((imp["stock_id"], imp["cycle"]), 0.0)
            contrib[(imp["stock_id"], imp["cycle"])] += imp["contribution"]
        bias = {
            (m["stock_id"], m["cycle"]): m["bias"] for m in body["models"]["models"]
        }
        part = partition_cycles(CFG.train_days, CFG.cycle_days, (31, 50))
        series = rolling_fit(
            ds, ds.stock_ids()[:2], part,
            ElasticNetConfig(variant="lasso", lambda_ratio=CFG.lambda_ratio),
        )
        for (sid, cyc), total in contrib.items():
            predicted_sum = float(series[sid].result(cyc).predicted.sum())
            assert total + CFG.cycle_days * bias[(sid, cyc)] == pytest.approx(
                predicted_sum, abs=1e-9
            )

    def test_unknown_dataset_404(self, client, dataset_csvs):
        ds = dataset_csvs["dataset"]
        r = client.post("/api/analysis", json=analysis_request(ds, "ds-missing"))
        assert r.status_code == 404

    def test_invalid_period_422(self, client, dataset_csvs):
        ds = dataset_csvs["dataset"]
        did = post_dataset(client, dataset_csvs)["dataset_id"]
        req = analysis_request(ds, did)
        req["period"] = {"start_date": "2015-01-01", "end_date": "2015-01-02"}
        assert client.post("/api/analysis", json=req).status_code == 422
        req = analysis_request(ds, did)
        req["period"]["end_date"] = req["period"]["start_date"]
        assert client.post("/api/analysis", json=req).status_code == 422

    def test_no_stocks_422(self, client, dataset_csvs):
        ds = dataset_csvs["dataset"]
        did = post_dataset(client, dataset_csvs)["dataset_id"]
        r = client.post(
            "/api/analysis", json=analysis_request(ds, did, stock_ids=[])
        )
        assert r.status_code == 422


class TestBacktestEndpoint:
    def backtest_body(self, ds, did, n=1):
        cal = ds.calendar
        spec = {
            "name": "p1",
            "stock_ids": list(ds.stock_ids()[:2]),
            "factor_ids": list(ds.factors.factor_names[:3]),
            "period": {
                "start_date": cal.date_of(31).isoformat(),
                "end_date": cal.date_of(50).isoformat(),
            },
            "variant": "lasso",
            "horizon": 5,
        }
        specs = [dict(spec, name=f"p{i + 1}") for i in range(n)]
        return {"dataset_id": did, "specs": specs}

    def test_two_specs_in_order(self, client, dataset_csvs):
        ds = dataset_csvs["dataset"]
        did = post_dataset(client, dataset_csvs)["dataset_id"]
        r = client.post("/api/backtest", json=self.backtest_body(ds, did, n=2))
        assert r.status_code == 200, r.text
        results = r.json()["results"]
        assert [x["spec"]["name"] for x in results] == ["p1", "p2"]
        for res in results:
            assert len(res["portfolio"]["daily"]) == 20
            assert len(res["outlook"]["cumulative"]) == 5
            assert res["summary"]["excess_return"] == pytest.approx(
                res["summary"]["period_return"] - res["summary"]["benchmark_return"],
                abs=1e-12,
            )

    def test_empty_spec_list_422(self, client, dataset_csvs):
        ds = dataset_csvs["dataset"]
        did = post_dataset(client, dataset_csvs)["dataset_id"]
        r = client.post("/api/backtest", json={"dataset_id": did, "specs": []})
        assert r.status_code == 422

    def test_unknown_stock_names_offender(self, client, dataset_csvs):
        ds = dataset_csvs["dataset"]
        did = post_dataset(client, dataset_csvs)["dataset_id"]
        body = self.backtest_body(ds, did, n=2)
        body["specs"][1]["stock_ids"] = ["GHOST"]
        r = client.post("/api/backtest", json=body)
        assert r.status_code == 422
        err = r.json()
        assert err["index"] == 1
        assert "GHOST" in err["detail"]


def test_canonical_bytes_round_trip():
    payload = {"b": 1, "a": [0.1, np.float64(0.25)], "nested": {"x": np.int64(3)}}
    raw = canonical_json_bytes(payload)
    assert raw == b'{"b":1,"a":[0.1,0.25],"nested":{"x":3}}'
    assert json.loads(raw) == {"b": 1, "a": [0.1, 0.25], "nested": {"x": 3}}
