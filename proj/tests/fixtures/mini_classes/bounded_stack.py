class BoundedStack:
    def __init__(self, capacity=3):
        self.capacity = capacity
        self.items = []

    def push(self, item):
        if len(self.items) >= self.capacity:
            return False
        self.items.append(item)
        return True

    def pop(self):
        if not self.items:
            return None
        return self.items.pop()

    def is_full(self):
        return len(self.items) == self.capacity
