#!/usr/bin/env python3
"""End-to-end checks of the mcbound command line: outputs, schema, exit codes, determinism."""

import json
import os
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

BIN = sys.argv[1]
SCHEMA = json.loads(Path(sys.argv[2]).read_text())
failures = []


def run(out, *args, env=None, fmt="json"):
    cmd = [BIN, "--output", str(out), "--format", fmt, *args]
    return subprocess.run(cmd, capture_output=True, text=True, env=env, timeout=300)


def load(out, stem):
    doc = json.loads((Path(out) / f"{stem}.json").read_text())
    jsonschema.validate(doc, SCHEMA)
    return doc


def check(name, cond, detail=""):
    print(("ok   " if cond else "FAIL ") + name + (f": {detail}" if detail and not cond else ""))
    if not cond:
        failures.append(name)


def case(name):
    def wrap(fn):
        with tempfile.TemporaryDirectory() as d:
            try:
                fn(Path(d))
            except Exception as e:  # report and keep going
                check(name, False, repr(e))
        return fn

    return wrap


@case("finite analyses")
def _(d):
    for analysis in ["stationary", "eigen-bound", "minorization", "pseudo", "tv-exact"]:
        r = run(d, "finite", analysis, "--grid", "3x3")
        check(f"finite {analysis} exits 0", r.returncode == 0, r.stderr)
    st = load(d, "finite_stationary")["result"]
    check("stationary law", st["stationary"] == ["1/11", "4/33", "1/11", "4/33", "5/33", "4/33", "1/11", "4/33", "1/11"])
    ps = load(d, "finite_pseudo")["result"]
    check("pseudo epsilon", ps["certificate"]["epsilon"] == "1/3")
    check("pseudo pairs", sorted(map(tuple, ps["certificate"]["argmin_pairs"])) == [(1, 9), (3, 7)])
    check("pseudo threshold", ps["steps_to_threshold"] == 24)
    un = load(d, "finite_minorization")["result"]
    check("uniform epsilon", un["certificate"]["epsilon"] == "9/80")
    check("uniform threshold", un["steps_to_threshold"] == 78)
    eb = load(d, "finite_eigen-bound")["result"]
    check("eigen coefficient", eb["coefficient"] <= 0.85)
    check("eigen rate", abs(eb["rate"] - 0.4667) <= 1e-3)
    check("eigen threshold", eb.get("steps_to_threshold") == 6, str(eb.get("steps_to_threshold")))
    tv = load(d, "finite_tv-exact")
    check("tv-exact status", tv["status"] == "ok")


@case("bounds")
def _(d):
    check("t1 halfline exit", run(d, "bound", "t1", "--preset", "halfline").returncode == 0)
    check("t1 halfline threshold", load(d, "bound_t1")["result"]["steps_to_threshold"] == 7)
    check("t1 point process", run(d, "bound", "t1", "--preset", "pointprocess", "--C", "0.1", "--D", "0.1").returncode == 0)
    check("t1 point process threshold", load(d, "bound_t1")["result"]["steps_to_threshold"] == 38)
    check("t1 rational epsilon", run(d, "bound", "t1", "--epsilon", "1/3", "--n0", "2").returncode == 0)
    check("t1 rational threshold", load(d, "bound_t1")["result"]["steps_to_threshold"] == 24)
    r = run(d, "bound", "t2", "--preset", "rwm-laplace", fmt="both")
    check("t2 preset exit", r.returncode == 0, r.stderr)
    t2 = load(d, "bound_t2")["result"]
    check("t2 alpha", abs(t2["alpha_inverse"] - 0.9927) <= 5e-4)
    check("t2 B", abs(t2["B"] - 20.04) <= 0.05)
    check("t2 schedule", t2["schedule"]["value"] < 0.01, json.dumps(t2["schedule"]))
    check("t2 csv", (d / "bound_t2.csv").read_text().startswith("n,value,j"))


@case("precondition failure")
def _(d):
    r = run(d, "bound", "t2", "--epsilon", "0.0169", "--lambda", "0.916", "--b", "0.285", "--d", "2",
            "--sup-rh", "20.1", "--eh", "2")
    check("failed precondition exits 3", r.returncode == 3, f"{r.returncode} {r.stderr}")
    check("message names inequality", "d > b/(1-lambda) - 1" in r.stderr, r.stderr)


@case("verification")
def _(d):
    r = run(d, "verify", "drift", "--preset", "rwm-laplace")
    check("drift exit", r.returncode == 0, r.stderr)
    v = load(d, "verify_drift")["result"]
    check("drift passes", v["passed"] and v["max_violation"] <= 1e-6)
    check("drift closed form", abs(v["pv_over_v_at_6"] - 0.9159) <= 1e-3)
    r = run(d, "verify", "drift", "--preset", "rwm-laplace", "--lambda", "0.5", "--b", "0")
    check("failing drift exits 3", r.returncode == 3, str(r.returncode))
    check("failing drift status", load(d, "verify_drift")["status"] == "fail")
    for preset in ["halfline", "rwm-laplace"]:
        r = run(d, "verify", "minorization", "--preset", preset)
        check(f"minorization {preset}", r.returncode == 0 and load(d, "verify_minorization")["result"]["passed"],
              r.stderr)


@case("simulation")
def _(d):
    args = ["simulate", "--grid", "3x3", "--reps", "20000", "--seed", "42", "--n-max", "60"]
    a, b = d / "a", d / "b"
    check("simulate exit", run(a, *args, fmt="both").returncode == 0)
    check("rerun exit", run(b, *args, fmt="both").returncode == 0)
    for ext in ["json", "csv"]:
        check(f"byte-identical {ext}", (a / f"simulate.{ext}").read_bytes() == (b / f"simulate.{ext}").read_bytes())
    doc = load(a, "simulate")
    check("seed recorded", doc["seed"] == 42 and doc["config"]["seed_source"] == "flag")
    check("no warnings", doc["warnings"] == [], json.dumps(doc["warnings"]))
    table = doc["result"]["table"]
    check("lattice times", [row["n"] for row in table] == list(range(0, 61, 2)))
    check("dominance", all(row["p_noncoupled"] <= row["bound"] + 3 * row["se"] for row in table))

    env = dict(os.environ, MCB_SEED="42")
    e = d / "e"
    check("env seed exit", run(e, *[x for x in args if x not in ("--seed", "42")], env=env).returncode == 0)
    env_doc = load(e, "simulate")
    check("env seed source", env_doc["config"]["seed_source"] == "env")
    check("env seed same result", env_doc["result"] == doc["result"])

    bad = dict(os.environ, MCB_SEED="abc")
    r = run(d / "x", *[x for x in args if x not in ("--seed", "42")], env=bad)
    check("bad env seed exits 2", r.returncode == 2, str(r.returncode))


@case("continuous simulation")
def _(d):
    r = run(d, "simulate", "--halfline", "--reps", "4000", "--seed", "1", "--n-max", "10")
    check("halfline exit", r.returncode == 0, r.stderr)
    table = load(d, "simulate")["result"]["table"]
    check("halfline geometric", all(abs(row["p_noncoupled"] - 2.0 ** -row["n"]) <= 3 * (2.0 ** -row["n"] * (1 - 2.0 ** -row["n"]) / 4000) ** 0.5 + 1e-12 for row in table))
    r = run(d, "simulate", "--rwm-laplace", "--reps", "200", "--seed", "1", "--n-max", "2000", "--stride", "100")
    check("laplace exit", r.returncode == 0, r.stderr)
    check("laplace mode", load(d, "simulate")["result"]["mode"] == "small_set")


@case("usage errors")
def _(d):
    for args in [["finite", "pseudo"], ["finite", "pseudo", "--grid", "3by3"], ["finite", "nonsense", "--grid", "3x3"],
                 ["bound", "t1"], ["simulate", "--grid", "3x3", "--reps", "0"],
                 ["finite", "pseudo", "--matrix-file", str(d / "missing.json")], ["no-such-command"]]:
        r = run(d, *args)
        check("usage error exits 2: " + " ".join(args[:3]), r.returncode == 2, f"{r.returncode} {r.stderr}")
    bad = d / "bad.json"
    bad.write_text('{"size": 2, "rows": [["1/2", "1/3"], ["0", "1"]]}')
    r = run(d, "finite", "stationary", "--matrix-file", str(bad))
    check("non-stochastic matrix exits 2", r.returncode == 2 and "sum" in r.stderr, f"{r.returncode} {r.stderr}")
    good = d / "good.json"
    good.write_text('{"size": 2, "rows": [["1/2", "1/2"], ["1/3", "2/3"]]}')
    r = run(d, "finite", "stationary", "--matrix-file", str(good))
    check("matrix file stationary", r.returncode == 0 and load(d, "finite_stationary")["result"]["stationary"] == ["2/5", "3/5"],
          r.stderr)
    r = run(d, "finite", "minorization", "--grid", "3x3", "--n0", "1")
    check("missing certificate exits 3", r.returncode == 3, f"{r.returncode} {r.stderr}")
    check("version flag", subprocess.run([BIN, "--version"], capture_output=True).returncode == 0)


print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
