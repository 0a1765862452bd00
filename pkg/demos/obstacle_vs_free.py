"""Does a compact obstacle change where the spectrum accumulates?

A hole in the plane (with a boundary condition on its rim) is a compact
perturbation: the essential spectrum, and hence the cluster ladder, should
match free space level for level, with only finitely many states moved.
This script runs the two-sided radius ladder and prints the verdict.
"""

from magspec.experiments import RunConfig, free_twin, ladder_compare
from magspec.fields import FieldSpec
from magspec.geometry import DiskObstacle

# ── Two configurations that differ only by the obstacle ────────────────────

# Desk-scale setup: only the first level fits in the window, and the wall
# sits a few magnetic lengths beyond the obstacle so its cluster has room
# to grow between the rungs.  The test suite runs the three-level version
# of this comparison at radii 8..12.
cfg = RunConfig(truncation_radius=5.0, truncation_shape="disk",
                obstacle=DiskObstacle((0.0, 0.0), 1.0), gamma=0.0,
                fieldspec=FieldSpec.constant(1.0, 2), h=0.35,
                window=(0.0, 2.0), delta=0.2)
twin = free_twin(cfg)
radii = (5.0, 6.5)

print("side A: disk obstacle radius 1.0, side B: free plane")
print(f"field b = 1, window {cfg.window}, radii {radii}, h = {cfg.h}\n")

# ── Ladder comparison ──────────────────────────────────────────────────────

comp = ladder_compare(cfg, twin, radii, diff_bound=10)

for name, lad in (("A (obstacle)", comp.ladder_a), ("B (free)", comp.ladder_b)):
    print(f"side {name}")
    for rung, rep in zip(lad.rungs, lad.report.reports):
        counts = {b.level: b.count for b in rep.buckets}
        print(f"  R = {rung.radius:4.1f}: counts {counts}, "
              f"off fraction {rep.off_cluster_fraction:.3f}")
    print(f"  persistent levels: {lad.report.persistent}")

print(f"\nverdict: {comp.verdict} ({comp.reason})")
