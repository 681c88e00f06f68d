"""coarselab: expanders, covers, walls, small cancellation labelings,
wreath lamp groups, Poincare inequalities, and coarse embedding
diagnostics for finite graphs."""

__version__ = "0.1.0"
