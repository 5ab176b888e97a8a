def retry_request(session, url, max_attempts=3):
  delay = 1.0
  for attempt in range(max_attempts):
    try:
      response = session.get(url, timeout=10)
      response.raise_for_status()
      return response
    except requests.RequestException:
      if attempt == max_attempts - 1:
        raise
      time.sleep(delay)
      delay *= 2
