"""A small coverage study over three interval methods.

Runs 100 simulated doubly censored samples and reports coverage and length.
Larger studies go through ``welrci simulate``.
"""
from welrci.simulation import StudyConfig, run_study

config = StudyConfig.from_preset("table3", 50, q=(0.5,), reps=100, B=200, seed=11,
                                 methods=("1-WELRCI", "1-WELRCI0", "SQBPCI"))
report = run_study(config, progress=lambda i, r: print(f"\r{i}/{r}", end="", flush=True))
print()
print(report.format())
print(f"wall time {report.wall_time:.1f}s")
