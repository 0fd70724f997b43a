TAX_RATE = 0.1


class ShoppingCart:
    def __init__(self):
        self.items = {}

    def add_item(self, name, price, quantity=1):
        if name in self.items:
            self.items[name]['quantity'] += quantity
        else:
            self.items[name] = {'price': price, 'quantity': quantity}

    def remove_item(self, name, quantity=1):
        if name not in self.items:
            return False
        self.items[name]['quantity'] -= quantity
        if self.items[name]['quantity'] <= 0:
            del self.items[name]
        return True

    def total_price(self):
        subtotal = 0.0
        for item in self.items.values():
            subtotal += item['price'] * item['quantity']
        return round(subtotal * (1 + TAX_RATE), 2)
