import os
import time

BASE = "/tmp/rhout"


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

# E. round cap, default grid, short T
t0 = time.time()
p = write_cfg("e.cfg", "scenario = round-cap\nT = 0.01\nout = %s/e\n" % BASE)
rc = harness.run_scenario(load_config(p))
print("E round-cap ps rc=%d  (%.1fs)" % (rc, time.time() - t0))
show(BASE + "/e")

# F. perturbed cap, default grid, short T
t0 = time.time()
p = write_cfg("f.cfg", "scenario = perturbed-cap\nT = 0.01\nout = %s/f\n"
              % BASE)
rc = harness.run_scenario(load_config(p))
print("F perturbed-cap ps rc=%d  (%.1fs)" % (rc, time.time() - t0))
show(BASE + "/f")
