import random, sys, time

sys.path.insert(0, "tests")
import gen
from grothpres import classify, model, oracle, syntax
from grothpres.semiring import class_const

spec0 = model.ModelSpec(0)
rng = random.Random(101)
times = []
for i in range(210):
    nv = rng.randint(1, 3)
    nq = rng.randint(0, min(2, nv - 1))
    vs = ("x", "y", "z")[:nv]
    cmax = {1: 10, 2: 6, 3: 3}[nv]
    f = gen.rand_qf(rng, vs, depth=rng.randint(1, 2), cmax=cmax, lit=10)
    f = gen.windowed(f, vs, 8)
    for q in vs[nv - nq :]:
        f = syntax.Exists(q, f)
    free = vs[: nv - nq]
    print(f"[{i}] nv={nv} nq={nq}", flush=True)
    ta = time.monotonic()
    n = oracle.brute_count(f, 16, vars=free)
    cls = classify.grothendieck_class(f, free, spec0)
    dt = time.monotonic() - ta
    times.append(dt)
    assert n is not oracle.UNBOUNDED and cls == class_const(n, 0), (i, n, cls)
    if dt > 1.0:
        print(f"[{i}] nv={nv} nq={nq} {dt:.2f}s", flush=True)
print(
    f"total {sum(times):.1f}s  max {max(times):.2f}s  "
    f">0.5s: {sum(t > 0.5 for t in times)}",
    flush=True,
)
