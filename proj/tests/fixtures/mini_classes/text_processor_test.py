import unittest


class TextProcessorTestWordCount(unittest.TestCase):
    def test_word_count(self):
        self.assertEqual(TextProcessor('Hello, big World 42').word_count(), 3)

    def test_word_count_empty(self):
        self.assertEqual(TextProcessor('').word_count(), 0)


class TextProcessorTestCapitalizeWords(unittest.TestCase):
    def test_capitalize_words(self):
        self.assertEqual(TextProcessor('hello big world').capitalize_words(),
                         'Hello Big World')

    def test_capitalize_keeps_rest(self):
        self.assertEqual(TextProcessor('mIxed').capitalize_words(), 'MIxed')


class TextProcessorTestIsPalindrome(unittest.TestCase):
    def test_palindrome(self):
        self.assertTrue(TextProcessor('A man, a plan, a canal: Panama').is_palindrome())

    def test_not_palindrome(self):
        self.assertFalse(TextProcessor('abc').is_palindrome())
