import numpy as np


class VectorStats:
    def __init__(self, values):
        self.values = np.array(values, dtype=float)

    def mean(self):
        if self.values.size == 0:
            return None
        return float(np.mean(self.values))

    def normalize(self):
        norm = np.linalg.norm(self.values)
        if norm == 0:
            return self.values.tolist()
        return (self.values / norm).tolist()

    def clip(self, low, high):
        return np.clip(self.values, low, high).tolist()
