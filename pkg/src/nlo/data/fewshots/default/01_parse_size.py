def parse_size(text: str) -> int:
  """Parse a human-readable size like '4 KB' into bytes."""
  units = {'B': 1, 'KB': 1024, 'MB': 1024 ** 2, 'GB': 1024 ** 3}
  match = re.fullmatch(r'(\d+(?:\.\d+)?)\s*([A-Z]+)', text.strip().upper())
  if match is None:
    raise ValueError(f'Unrecognized size: {text!r}')
  number, unit = match.groups()
  if unit not in units:
    raise ValueError(f'Unknown unit: {unit}')
  return int(float(number) * units[unit])
