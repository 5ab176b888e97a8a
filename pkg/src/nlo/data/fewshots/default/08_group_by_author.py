def group_by_author(commits):
  groups = {}
  for commit in commits:
    author = commit.author.email.lower()
    groups.setdefault(author, []).append(commit)

  counts = {author: len(items) for author, items in groups.items()}
  return groups, counts
