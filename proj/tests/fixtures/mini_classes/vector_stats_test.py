import unittest


class VectorStatsTestMean(unittest.TestCase):
    def test_mean(self):
        self.assertAlmostEqual(VectorStats([1, 2, 3, 6]).mean(), 3.0)

    def test_mean_empty(self):
        self.assertIsNone(VectorStats([]).mean())


class VectorStatsTestNormalize(unittest.TestCase):
    def test_normalize(self):
        result = VectorStats([3, 4]).normalize()
        self.assertAlmostEqual(result[0], 0.6)
        self.assertAlmostEqual(result[1], 0.8)

    def test_normalize_zero(self):
        self.assertEqual(VectorStats([0, 0]).normalize(), [0.0, 0.0])


class VectorStatsTestClip(unittest.TestCase):
    def test_clip(self):
        self.assertEqual(VectorStats([-5, 0, 5]).clip(-1, 2), [-1.0, 0.0, 2.0])
