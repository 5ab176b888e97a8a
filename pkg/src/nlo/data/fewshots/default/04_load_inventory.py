def load_inventory(path):
  """Load an inventory CSV into a list of item dicts."""
  items = []
  with open(path, newline='') as f:
    reader = csv.DictReader(f)
    for row in reader:
      row['quantity'] = int(row['quantity'])
      row['price'] = float(row['price'])
      items.append(row)
  return items
