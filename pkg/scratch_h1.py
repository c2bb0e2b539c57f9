import os
import time

BASE = "/tmp/rhout"
os.makedirs(BASE, exist_ok=True)


def write_cfg(name, body):
    path = os.path.join(BASE, name)
    with open(path, "w") as fh:
        fh.write(body)
    return path


def show(outdir):
    with open(os.path.join(outdir, "report.txt")) as fh:
        print(fh.read())


from rhflow.config import load_config
from rhflow import harness

t0 = time.time()

# A. flat square, tiny
p = write_cfg("a.cfg", "scenario = flat-square\nT = 0.02\ngrid = 33\n"
              "out = %s/a\n" % BASE)
rc = harness.run_scenario(load_config(p))
print("A flat-square ps rc=%d  (%.1fs)" % (rc, time.time() - t0))
show(BASE + "/a")

# B. cylinder ps default grid, T=0.1
t0 = time.time()
p = write_cfg("b.cfg", "scenario = flat-cylinder-circle-map\nT = 0.1\n"
              "out = %s/b\n" % BASE)
rc = harness.run_scenario(load_config(p))
print("B cylinder ps rc=%d  (%.1fs)" % (rc, time.time() - t0))
show(BASE + "/b")

# C. cylinder q3 default dt
t0 = time.time()
p = write_cfg("c.cfg", "scenario = flat-cylinder-circle-map\nsystem = q3\n"
              "T = 0.1\nout = %s/c\n" % BASE)
rc = harness.run_scenario(load_config(p))
print("C cylinder q3 rc=%d  (%.1fs)" % (rc, time.time() - t0))
show(BASE + "/c")

# D. cylinder p2
t0 = time.time()
p = write_cfg("d.cfg", "scenario = flat-cylinder-circle-map\nsystem = p2\n"
              "T = 0.1\nout = %s/d\n" % BASE)
rc = harness.run_scenario(load_config(p))
print("D cylinder p2 rc=%d  (%.1fs)" % (rc, time.time() - t0))
show(BASE + "/d")
