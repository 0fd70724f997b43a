class StatusFlags:
    def __init__(self):
        self.state = 0

    def add(self, status):
        self.state = self.state | status
        return self.state

    def has(self, status):
        return self.state & status == status

    def remove(self, status):
        if self.has(status):
            self.state = self.state ^ status
        return self.state
