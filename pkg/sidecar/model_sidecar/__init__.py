"""HTTP sidecar exposing definition generation and embeddings.

Wire protocols:
- POST /v1/define: {"items": [{"id", "prompt", "banned_word"}],
  "decoding": "greedy", "max_new_tokens": N}
  -> {"items": [{"id", "definition"}], "generator_id": str}
- POST /v1/embed: {"subject": "definition"|"sentence", "texts": [...]} or
  {"subject": "token-span", "items": [{"context", "start", "end"}]}
  -> {"dim": int, "vectors": [[...], ...], "provider_id": str}
- GET /v1/health -> model ids and dimensions.
"""

__version__ = "0.1.0"
