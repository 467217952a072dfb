"""Drive a live questionnaire session through the HTTP API in-process.

The same service backs the browser UI; here a scripted respondent with
known preferences answers every query, and we watch the mass concentrate.
"""

import numpy as np
from fastapi.testclient import TestClient

from acquest.choice import sigmoid
from acquest.datasets import desk_scale_partworths, desk_scale_space
from acquest.service import SessionConfig, create_app

space = desk_scale_space()
w_true = desk_scale_partworths()
vectors = space.with_competitor(0).market().vectors  # competitor irrelevant here
rng = np.random.default_rng(5)

app = create_app(space, defaults=SessionConfig(budget=12, sample_size=500,
                                               candidate_size=20, seed=5))
client = TestClient(app)

created = client.post("/sessions", json={}).json()
sid = created["id"]
print(f"session {sid[:8]}… started, budget {created['budget']}")

payload = created
while payload.get("status") != "complete":
    query = payload.get("query") or client.get(f"/sessions/{sid}/query").json()
    left, right = query["left"], query["right"]
    gap = float(w_true @ (vectors[left["design_index"]]
                          - vectors[right["design_index"]]))
    chosen = left if rng.uniform() < sigmoid(100.0 * gap) else right
    payload = client.post(f"/sessions/{sid}/responses",
                          json={"query_id": query["query_id"],
                                "chosen": chosen["design_index"]}).json()
    print(f"  q{payload['q']:>2}: chose design {chosen['design_index']:>2} "
          f"(${chosen['price']:.0f}) -> H = {payload['entropy_bits']:.2f} bits, "
          f"top pi = {payload['top'][0]['pi']:.2f}")

state = client.get(f"/sessions/{sid}/state").json()
best = state["recommendation"]
print(f"\nrecommended design: #{best['design_index']} "
      f"levels {best['levels']} with pi = {best['pi']:.2f}")
print("entropy trajectory:",
      " -> ".join(f"{h:.2f}" for h in state["entropy_trajectory"]))
