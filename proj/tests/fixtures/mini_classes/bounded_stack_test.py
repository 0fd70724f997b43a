import unittest


class BoundedStackTestPush(unittest.TestCase):
    def test_push_until_full(self):
        stack = BoundedStack(2)
        self.assertTrue(stack.push('a'))
        self.assertTrue(stack.push('b'))
        self.assertFalse(stack.push('c'))
        self.assertEqual(stack.items, ['a', 'b'])


class BoundedStackTestPop(unittest.TestCase):
    def test_pop(self):
        stack = BoundedStack()
        stack.items = [1, 2]
        self.assertEqual(stack.pop(), 2)
        self.assertEqual(stack.items, [1])

    def test_pop_empty(self):
        self.assertIsNone(BoundedStack().pop())


class BoundedStackTestIsFull(unittest.TestCase):
    def test_is_full(self):
        stack = BoundedStack(1)
        self.assertFalse(stack.is_full())
        stack.items = ['x']
        self.assertTrue(stack.is_full())
