import re


class TextProcessor:
    def __init__(self, text):
        self.text = text

    def word_count(self):
        words = re.findall(r'[a-z]+', self.text.lower())
        return len(words)

    def capitalize_words(self):
        result = []
        for word in self.text.split(' '):
            result.append(word[:1].upper() + word[1:])
        return ' '.join(result)

    def is_palindrome(self):
        cleaned = ''.join(ch.lower() for ch in self.text if ch.isalnum())
        return cleaned == cleaned[::-1]
