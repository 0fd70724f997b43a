import unittest


class ShoppingCartTestAddItem(unittest.TestCase):
    def test_add_new(self):
        cart = ShoppingCart()
        cart.add_item('apple', 1.5, 2)
        self.assertEqual(cart.items, {'apple': {'price': 1.5, 'quantity': 2}})

    def test_add_existing(self):
        cart = ShoppingCart()
        cart.add_item('apple', 1.5)
        cart.add_item('apple', 1.5, 3)
        self.assertEqual(cart.items['apple']['quantity'], 4)


class ShoppingCartTestRemoveItem(unittest.TestCase):
    def test_remove_partial(self):
        cart = ShoppingCart()
        cart.items = {'pear': {'price': 2.0, 'quantity': 3}}
        self.assertTrue(cart.remove_item('pear', 2))
        self.assertEqual(cart.items['pear']['quantity'], 1)

    def test_remove_all(self):
        cart = ShoppingCart()
        cart.items = {'pear': {'price': 2.0, 'quantity': 1}}
        self.assertTrue(cart.remove_item('pear'))
        self.assertEqual(cart.items, {})

    def test_remove_missing(self):
        cart = ShoppingCart()
        self.assertFalse(cart.remove_item('kiwi'))


class ShoppingCartTestTotalPrice(unittest.TestCase):
    def test_total(self):
        cart = ShoppingCart()
        cart.items = {'a': {'price': 10.0, 'quantity': 2},
                      'b': {'price': 5.0, 'quantity': 1}}
        self.assertEqual(cart.total_price(), 27.5)

    def test_empty(self):
        self.assertEqual(ShoppingCart().total_price(), 0.0)
