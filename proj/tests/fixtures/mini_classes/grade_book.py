PASSING_SCORE = 60


class GradeBook:
    def __init__(self):
        self.scores = {}

    def add_score(self, student, score):
        self.scores.setdefault(student, []).append(score)

    def average(self, student):
        scores = self.scores.get(student, [])
        if not scores:
            return 0
        return sum(scores) / len(scores)

    def letter_grade(self, student):
        avg = self.average(student)
        if avg >= 90:
            return 'A'
        elif avg >= 80:
            return 'B'
        elif avg >= PASSING_SCORE:
            return 'C'
        return 'F'

    def passing_students(self):
        return sorted(s for s in self.scores if self.average(s) >= PASSING_SCORE)
