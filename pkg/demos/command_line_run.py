"""
A full run from the command line
================================

The ``isumap`` command writes the distance table, the embedding, a
manifest and SVG plots into one directory.  Here it is called in-process
with the probabilistic sum, a second metric MDS pass and two clusters.
"""

import json
from pathlib import Path

from isumap import cli

out = Path("demo_out") / "torus_run"
code = cli.main(["--generate", "torus", "--n", "400", "--k", "12", "--tconorm", "probsum",
                 "--rho", "nn", "--sigma", "smooth", "--mds", "cmds+sgd", "--epochs", "10",
                 "--clusters", "2", "--iters", "50", "--seed", "1", "--out", str(out)])
print("exit code:", code)

manifest = json.loads((out / "manifest.json").read_text())
print("status:", manifest["status"])
print("files:", sorted(p.name for p in out.iterdir()))

# The manifest doubles as a configuration file, so the run can be repeated
# with ``isumap --config demo_out/torus_run/manifest.json``.
