import unittest


class StatusFlagsTestAdd(unittest.TestCase):
    def test_add_same_flag_twice(self):
        flags = StatusFlags()
        flags.state = 1
        flags.add(1)
        self.assertEqual(flags.state, 1)

    def test_add_distinct_flags(self):
        flags = StatusFlags()
        flags.add(1)
        self.assertEqual(flags.add(2), 3)


class StatusFlagsTestRemove(unittest.TestCase):
    def test_remove_present(self):
        flags = StatusFlags()
        flags.state = 3
        self.assertEqual(flags.remove(2), 1)

    def test_remove_absent(self):
        flags = StatusFlags()
        flags.state = 1
        self.assertEqual(flags.remove(2), 1)

    def test_has(self):
        flags = StatusFlags()
        flags.state = 5
        self.assertTrue(flags.has(4))
        self.assertFalse(flags.has(2))
