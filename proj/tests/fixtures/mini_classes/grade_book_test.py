import unittest


class GradeBookTestAverage(unittest.TestCase):
    def test_average(self):
        book = GradeBook()
        book.scores = {'ann': [80, 90, 100]}
        self.assertEqual(book.average('ann'), 90)

    def test_average_missing(self):
        self.assertEqual(GradeBook().average('zed'), 0)


class GradeBookTestLetterGrade(unittest.TestCase):
    def test_letter_grades(self):
        book = GradeBook()
        book.scores = {'a': [95], 'b': [85], 'c': [60], 'f': [59]}
        grades = [book.letter_grade(s) for s in 'abcf']
        self.assertEqual(grades, ['A', 'B', 'C', 'F'])


class GradeBookTestPassingStudents(unittest.TestCase):
    def test_passing_students(self):
        book = GradeBook()
        book.add_score('zoe', 70)
        book.add_score('al', 60)
        book.add_score('max', 10)
        self.assertEqual(book.passing_students(), ['al', 'zoe'])
