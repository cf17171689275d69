"""Exit codes, determinism and output shape of the fkit command."""
import json
import subprocess
import sys
import tempfile
import os

exe = sys.argv[1]
failures = []


def run(*args, env=None):
    e = dict(os.environ)
    e.pop("FKIT_CACHE", None)
    if env:
        e.update(env)
    return subprocess.run([exe, *args], capture_output=True, text=True, env=e)


def check(name, cond, detail=""):
    print(("ok   " if cond else "FAIL ") + name + ("" if cond else "  " + detail))
    if not cond:
        failures.append(name)


wedge = '{"n":1,"m":2,"stars":[["b1","b2"]]}'
a = run("weight", wedge, "--samples", "65536", "--seed", "3")
b = run("weight", wedge, "--samples", "65536", "--seed", "3")
check("weight exit 0", a.returncode == 0, a.stderr)
check("weight deterministic", a.stdout == b.stdout)
w = json.loads(a.stdout)
check("wedge value", abs(w["value"] - 0.5) < 0.01, a.stdout)
check("weight fields", set(w) == {"graph", "value", "std_error", "samples", "seed", "exact"}, a.stdout)

m = run("weight", '{"n":2,"m":2,"stars":[["b1","b2"],["b1"]]}')
mj = json.loads(m.stdout)
check("degree mismatch is exact 0", mj["value"] == 0 and mj["exact"] is True and mj["samples"] == 0, m.stdout)

bad = run("weight", '{"n":1,"m":1,"stars":[["v1"]]}')
check("invalid graph exit 2", bad.returncode == 2, bad.stderr)
check("stderr is json", "error" in json.loads(bad.stderr.strip().splitlines()[-1]))
check("parse error exit 2", run("weight", "{oops").returncode == 2)
check("budget exit 3", run("weight", wedge, "--samples", "100000000000").returncode == 3)

with tempfile.TemporaryDirectory() as tmp:
    pi = os.path.join(tmp, "pi.json")
    with open(pi, "w") as f:
        json.dump({"dim": 2, "pi": [[1, 2, "1"]]}, f)
    cache = os.path.join(tmp, "w.jsonl")
    s = run("star", pi, "x1", "x2", "--order", "1", "--samples", "65536", "--cache", cache)
    check("star exit 0", s.returncode == 0, s.stderr)
    sj = json.loads(s.stdout)
    check("star hbar^0", sj["series"][0]["text"] == "x1*x2", s.stdout)
    t = run("star", pi, "x2", "x1", "--order", "1", "--samples", "65536", "--cache", cache)
    tj = json.loads(t.stdout)
    c1 = sum(x["value"] for x in sj["series"][1]["terms"]) - sum(x["value"] for x in tj["series"][1]["terms"])
    check("star commutator", abs(c1 - 2) < 0.05, str(c1))
    check("cache written", os.path.exists(cache))

    out = os.path.join(tmp, "duflo.json")
    d = run("verify", "duflo", "sl2", "--out", out)
    check("verify duflo exit 0", d.returncode == 0, d.stderr)
    with open(out) as f:
        check("verify duflo report", json.load(f)["pass"] is True)

check("unknown suite exit 2", run("verify", "nope").returncode == 2)
du = run("duflo", "abelian", "x1^2")
check("duflo abelian", json.loads(du.stdout)["value"] == "x1^2", du.stdout)
du = run("duflo", "sl2", "x1^2 + 4*x2*x3")
check("duflo sl2 casimir", json.loads(du.stdout)["value"] == "x1^2 + 4*x2*x3 - 2*x1 + 1", du.stdout)
check("duflo bad element exit 2", run("duflo", "sl2", "x1^").returncode == 2)

sys.exit(1 if failures else 0)
