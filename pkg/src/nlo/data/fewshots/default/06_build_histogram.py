def build_histogram(values, bucket_count):
  low, high = min(values), max(values)
  width = (high - low) / bucket_count or 1.0
  buckets = [0] * bucket_count
  for value in values:
    index = min(int((value - low) / width), bucket_count - 1)
    buckets[index] += 1
  return low, width, buckets
