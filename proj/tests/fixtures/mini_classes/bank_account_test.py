import unittest


class BankAccountTestDeposit(unittest.TestCase):
    def test_deposit(self):
        account = BankAccount('ann', 10)
        self.assertEqual(account.deposit(5), 15)
        self.assertEqual(account.history, [('deposit', 5)])

    def test_deposit_invalid(self):
        with self.assertRaises(ValueError):
            BankAccount('ann').deposit(0)


class BankAccountTestWithdraw(unittest.TestCase):
    def test_withdraw(self):
        account = BankAccount('bob', 10)
        self.assertEqual(account.withdraw(4), 6)
        self.assertEqual(account.history, [('withdraw', 4)])

    def test_withdraw_all(self):
        self.assertEqual(BankAccount('bob', 10).withdraw(10), 0)

    def test_withdraw_too_much(self):
        with self.assertRaises(InsufficientFunds):
            BankAccount('bob', 3).withdraw(4)


class BankAccountTestTransfer(unittest.TestCase):
    def test_transfer(self):
        a = BankAccount('a', 10)
        b = BankAccount('b', 1)
        self.assertTrue(a.transfer(b, 4))
        self.assertEqual((a.balance, b.balance), (6, 5))
