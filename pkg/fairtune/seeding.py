import hashlib
import json

import numpy as np


def derive_seeds(seed, count):
    """Independent 64-bit child seeds of seed, stable across runs"""
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def fingerprint(payload):
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
