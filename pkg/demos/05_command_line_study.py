"""
A complete study from the command line
======================================

The same computations are available through the ``cohesilab`` command. A
TOML file selects the kinds and internal lengths; every command writes CSV,
JSON and SVG files with the settings recorded next to the data.
"""

from __future__ import annotations

from pathlib import Path

from cohesilab.cli import main

study = Path("demo_out") / "study.toml"
study.parent.mkdir(exist_ok=True)
study.write_text(
    'kinds = ["L12", "H1"]\n'
    "ell = [10, 5]\n"
    "[grid]\ncount = 40\n"
    "[profiles]\nalpha_star = [0.2, 0.6, 0.95]\n",
    encoding="utf-8",
)

# equivalent to: cohesilab catalog --config demo_out/study.toml --out demo_out/study
for command in ("catalog", "respond", "profiles"):
    code = main([command, "--config", str(study), "--out", "demo_out/study"])
    print(f"{command}: exit {code}")

for path in sorted(Path("demo_out/study").rglob("*.csv")):
    print(path)
