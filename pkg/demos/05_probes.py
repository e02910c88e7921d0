"""
Hypothesis probes on the shipped problem files.

``implicit-kit check`` runs these through the command line; here they are
called directly. The hard preconditions are the base residual and the base
determinant; the other verdicts are sampled evidence only.
"""

import io
import json
from pathlib import Path

from implicit_kit.cli import main

here = Path(__file__).parent / "problems"
for path in sorted(here.glob("*.json")):
    out = io.StringIO()
    code = main(["check", str(path)], out=out)
    report = json.loads(out.getvalue())
    verdicts = ", ".join(f"{k}={'yes' if v else 'no'}" for k, v in report["verdicts"].items())
    print(f"{path.stem:9s} exit {code}  det {report['base_det']:<6g} radius {report['radius']}")
    print(f"          {verdicts}")
