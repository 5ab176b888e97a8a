def rotate_logs(directory, keep=5):
  logs = sorted(directory.glob('*.log'), key=lambda p: p.stat().st_mtime)
  stale = logs[:-keep] if keep else logs
  for path in stale:
    path.unlink()
  return len(stale)
