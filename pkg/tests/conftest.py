import numpy as np
import pytest

from prockt.data import Dataset, InteractionRecord, MPRatios, Problem, StudentSequence


def make_problem(pid="prob-1", text="Solve x^2 - 5x + 6 = 0.", qtype="multiple_choice",
                 options=("1", "2", "3", "4", "5"), kc_ids=("Quadratic Equations",)):
    return Problem(problem_id=pid, kc_ids=list(kc_ids), text=text,
                   solution_text="Factor into (x-2)(x-3).", answer="2",
                   question_type=qtype, difficulty=3,
                   options=list(options) if qtype == "multiple_choice" else [])


def make_record(sid="s1", pid="prob-1", correct=1, timestamp=1000, lines=6, mp=None):
    text = "\n".join(f"line {i}: working" for i in range(lines))
    return InteractionRecord(student_id=sid, problem_id=pid, selected_answer="2",
                             correct=correct, duration=42.5, process_text=text,
                             timestamp=timestamp, mp=mp)


def make_dataset(num_students=3, steps=4):
    problems = {f"p{i}": make_problem(pid=f"p{i}", text=f"Problem {i}: solve for x.",
                                      kc_ids=[f"kc{i % 2}"]) for i in range(5)}
    sequences = []
    for s in range(num_students):
        sid = f"s{s}"
        steps_list = [make_record(sid=sid, pid=f"p{t % 5}", correct=(s + t) % 2,
                                  timestamp=1000 + t * 10,
                                  mp=MPRatios.from_counts({"CU": (1, 2), "SC": (2, 3),
                                                           "PF": (3, 4), "AR": (0, 2)}))
                      for t in range(steps)]
        sequences.append(StudentSequence(student_id=sid, steps=steps_list))
    return Dataset(problems=problems, sequences=sequences)


@pytest.fixture
def problem():
    return make_problem()


@pytest.fixture
def dataset():
    return make_dataset()


@pytest.fixture
def rng():
    return np.random.default_rng(0)
