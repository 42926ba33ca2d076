"""Report, trajectory and decay-table writers."""
