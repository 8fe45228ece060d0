import faulthandler
import random, sys, time

sys.path.insert(0, "tests")
import gen
from grothpres import classify, model, oracle, syntax

spec0 = model.ModelSpec(0)
rng = random.Random(101)
keep = None
N = 22
for i in range(N + 1):
    nv = rng.randint(1, 3)
    nq = rng.randint(0, min(2, nv - 1))
    vs = ("x", "y", "z")[:nv]
    cmax = {1: 10, 2: 6, 3: 3}[nv]
    f = gen.rand_qf(rng, vs, depth=rng.randint(1, 2), cmax=cmax, lit=10)
    f = gen.windowed(f, vs, 8)
    for q in vs[nv - nq :]:
        f = syntax.Exists(q, f)
    free = vs[: nv - nq]
    if i == N:
        keep = (f, free, nv, nq)

f, free, nv, nq = keep
print(f"nv={nv} nq={nq}", syntax.format_formula(f)[:260], flush=True)
t0 = time.monotonic()
n = oracle.brute_count(f, 16, vars=free)
print(f"brute {time.monotonic()-t0:.2f}s n={n}", flush=True)
faulthandler.dump_traceback_later(20, exit=True)
t0 = time.monotonic()
cls = classify.grothendieck_class(f, free, spec0)
print(f"class {time.monotonic()-t0:.2f}s {cls}", flush=True)
