def test_normalize_rejects_empty_input(self):
  records = []
  with self.assertRaises(ValueError) as ctx:
    normalize_records(records)
  self.assertIn('at least one record', str(ctx.exception))
