import json
import re
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_dataset, make_problem
from prockt.pipeline import (
    ChatClientError,
    ChatParams,
    EmptyRubricError,
    HttpChatClient,
    IncompleteVerdictError,
    Indicator,
    IndicatorSet,
    MockChatClient,
    ParseError,
    audit_key,
    compute_mp_ratios,
    extract_json_object,
    parse_indicators,
    parse_responses,
    parse_verdicts,
    render_eval_prompt,
    render_indicator_prompt,
    render_student_prompt,
    run_pipeline,
)
from prockt.pipeline.prompts import EVAL_TEMPLATE, INDICATOR_TEMPLATE, STUDENT_TEMPLATE

GOLDEN = Path(__file__).parent / "golden"


def fixed_indicators():
    return IndicatorSet(problem_id="prob-1", indicators=[
        Indicator.from_code("CU1", "Recognize this as a quadratic equation"),
        Indicator.from_code("SC1", "Choose factoring as the solution strategy"),
        Indicator.from_code("PF1", "Factor the quadratic into two binomials"),
        Indicator.from_code("AR1", "Justify why each root satisfies the equation"),
    ])


FIXED_PROCESS = "x^2 - 5x + 6 = 0\n(x-2)(x-3) = 0\nx = 2 or x = 3"
FIXED_RESPONSES = {
    "CU1": "This is a quadratic equation.",
    "SC1": "I factored the expression.",
    "PF1": "(x-2)(x-3) = 0",
    "AR1": "I don't know",
}


# -- prompt rendering -----------------------------------------------------

class TestPrompts:
    def test_indicator_prompt_matches_golden(self):
        rendered = render_indicator_prompt(make_problem())
        assert rendered == (GOLDEN / "indicator_prompt.txt").read_text()

    def test_student_prompt_matches_golden(self):
        rendered = render_student_prompt(make_problem(), fixed_indicators(),
                                         FIXED_PROCESS, "2")
        assert rendered == (GOLDEN / "student_prompt.txt").read_text()

    def test_eval_prompt_matches_golden(self):
        rendered = render_eval_prompt(make_problem(), fixed_indicators(),
                                      FIXED_RESPONSES)
        assert rendered == (GOLDEN / "eval_prompt.txt").read_text()

    def test_required_literals(self):
        assert INDICATOR_TEMPLATE.startswith("You are Teacher GPT.")
        assert STUDENT_TEMPLATE.startswith("You are Student GPT.")
        assert '"I don\'t know"' in STUDENT_TEMPLATE
        assert 'assign 0' in EVAL_TEMPLATE
        assert '"Not written, but likely ..."' in EVAL_TEMPLATE

    def test_rendering_substitutes_all_placeholders(self):
        rendered = render_student_prompt(make_problem(), fixed_indicators(),
                                         FIXED_PROCESS, "2")
        # placeholder names from the input sections must all be gone
        for name in ("indicator_text", "problem_option_string",
                     "student_solving_trace", "solution_answer_sets"):
            assert "{" + name + "}" not in rendered

    def test_option_line_format(self):
        rendered = render_indicator_prompt(make_problem())
        assert 'Options: [{"index":1,"text":"1"}, {"index":2,"text":"2"}' in rendered

    def test_short_answer_has_no_option_line(self):
        problem = make_problem(qtype="short_answer", options=())
        rendered = render_indicator_prompt(problem)
        assert "Options:" not in rendered.split("----------------------------------")[-1]

    def test_unit_name_joins_concepts(self):
        problem = make_problem(kc_ids=("Sequences", "Series"))
        rendered = render_indicator_prompt(problem)
        assert rendered.rstrip().endswith("Unit (in Korean): Sequences, Series")

    def test_empty_problem_text_rejected(self):
        with pytest.raises(ValueError):
            render_indicator_prompt(make_problem(text="   "))

    def test_empty_indicator_set_rejected(self, problem):
        with pytest.raises(ValueError):
            render_student_prompt(problem, IndicatorSet(problem_id="p"), "x", "1")

    def test_rendering_is_deterministic(self, problem):
        a = render_eval_prompt(problem, fixed_indicators(), FIXED_RESPONSES)
        b = render_eval_prompt(problem, fixed_indicators(), FIXED_RESPONSES)
        assert a == b


# -- completion parsing ---------------------------------------------------

FOURTEEN = [
    ("CU1", "Determine the type and order of this equation"),
    ("SC1", "Rewrite the equation in an easier way"),
    ("CU2", "Write the mathematical idea you need to solve this equation"),
    ("CU3", "Give an example of how this equation will be applied in real life"),
    ("CU4", "Find another differential equation whose solution steps are similar"),
    ("SC2", "Sort the necessary data and ignore the redundant ones"),
    ("PF2", "Predict a solution"),
    ("CU5", "Show the steps for solving the equation using a table, a figure and a diagram"),
    ("PF1", "Summarize the steps in the solution"),
    ("PF3", "Write a suitable algorithm to solve this equation"),
    ("SC3", "Identify any special numerical cases used by this equation to generalize the solution"),
    ("AR1", "Describe your solution in general"),
    ("AR2", "Based on your knowledge of differential equations, interpret your solution"),
    ("AR3", "According to your solution, draw the conclusions"),
]


def indicator_completion(pairs):
    body = {"mathematical_proficiency_indicators": [{c: t} for c, t in pairs]}
    return json.dumps(body, indent=2)


class TestExtractJsonObject:
    def test_bare_object(self):
        assert extract_json_object('{"a": 1}') == {"a": 1}

    def test_fenced_object(self):
        raw = 'Sure, here you go:\n```json\n{"a": 1}\n```\nHope that helps.'
        assert extract_json_object(raw) == {"a": 1}

    def test_object_embedded_in_prose(self):
        raw = 'The rubric {which follows} is: {"CU1": "x"} as requested.'
        assert extract_json_object(raw) == {"CU1": "x"}

    def test_no_object_raises(self):
        with pytest.raises(ParseError):
            extract_json_object("no json here [1, 2, 3]")


class TestParseIndicators:
    def test_full_rubric(self):
        got = parse_indicators(indicator_completion(FOURTEEN), "p1")
        assert got.codes() == [c for c, _ in FOURTEEN]
        sizes = {cat: len(inds) for cat, inds in got.by_category().items()}
        assert sizes == {"CU": 5, "SC": 3, "PF": 3, "AR": 3}
        assert got.indicators[0].text == FOURTEEN[0][1]

    def test_unknown_code_dropped(self):
        pairs = [("CU1", "a"), ("AD1", "not a real category"), ("PF1", "b")]
        got = parse_indicators(indicator_completion(pairs), "p1")
        assert got.codes() == ["CU1", "PF1"]

    def test_duplicate_keeps_first(self):
        pairs = [("CU1", "first"), ("CU1", "second"), ("SC1", "s")]
        got = parse_indicators(indicator_completion(pairs), "p1")
        assert got.codes() == ["CU1", "SC1"]
        assert got.indicators[0].text == "first"

    def test_plain_dict_listing(self):
        raw = json.dumps({"mathematical_proficiency_indicators": {"CU1": "a", "PF1": "b"}})
        assert parse_indicators(raw, "p1").codes() == ["CU1", "PF1"]

    def test_all_invalid_raises(self):
        raw = indicator_completion([("AD1", "x"), ("XY2", "y")])
        with pytest.raises(EmptyRubricError):
            parse_indicators(raw, "p1")

    def test_garbage_raises(self):
        with pytest.raises(ParseError):
            parse_indicators("I cannot help with that.", "p1")


class TestParseResponses:
    def test_missing_filled_with_unanswered(self):
        raw = json.dumps({"CU1": "yes", "PF1": "done"})
        got = parse_responses(raw, fixed_indicators())
        assert got == {"CU1": "yes", "PF1": "done",
                       "SC1": "I don't know", "AR1": "I don't know"}

    def test_unknown_keys_dropped(self):
        raw = json.dumps({"CU1": "yes", "CU9": "extra"})
        got = parse_responses(raw, fixed_indicators())
        assert "CU9" not in got
        assert set(got) == {"CU1", "SC1", "PF1", "AR1"}

    def test_fenced_response_object(self):
        raw = '```json\n{"CU1": "a", "SC1": "b"}\n```'
        got = parse_responses(raw, fixed_indicators())
        assert got["CU1"] == "a" and got["SC1"] == "b"
        assert got["PF1"] == "I don't know"


class TestParseVerdicts:
    RAW = json.dumps({
        "CU1": 1, "CU2": 0, "SC1": 1, "PF1": 1, "SC2": 1, "AR1": 0, "PF2": 1,
        "PF3": 1, "PF4": 1, "PF5": 0, "AR2": 0, "SC3": 0, "CU3": 1,
    })

    @staticmethod
    def rubric():
        codes = ["CU1", "CU2", "SC1", "PF1", "SC2", "AR1", "PF2", "PF3",
                 "PF4", "PF5", "AR2", "SC3", "CU3"]
        return IndicatorSet(problem_id="p1", indicators=[
            Indicator.from_code(c, f"step {c}") for c in codes])

    def test_full_verdict_map(self):
        got = parse_verdicts(self.RAW, self.rubric())
        assert len(got) == 13
        assert sum(got.values()) == 8
        assert got["PF5"] == 0 and got["CU1"] == 1

    def test_fractional_verdict_rejected(self):
        raw = json.dumps({c: (0.5 if c == "SC1" else 1) for c in self.rubric().codes()})
        with pytest.raises(ValueError, match="0 or 1"):
            parse_verdicts(raw, self.rubric())

    def test_bool_verdict_rejected(self):
        raw = json.dumps({c: (True if c == "SC1" else 1) for c in self.rubric().codes()})
        with pytest.raises(ValueError):
            parse_verdicts(raw, self.rubric())

    def test_incomplete_raises_with_missing_codes(self):
        partial = json.loads(self.RAW)
        del partial["SC3"]
        with pytest.raises(IncompleteVerdictError) as exc_info:
            parse_verdicts(json.dumps(partial), self.rubric())
        assert exc_info.value.missing == ["SC3"]


# -- verdicts to ratios ---------------------------------------------------

class TestComputeMPRatios:
    def test_reference_case(self):
        verdicts = json.loads(TestParseVerdicts.RAW)
        mp = compute_mp_ratios(TestParseVerdicts.rubric(), verdicts)
        expect = {"CU": Fraction(2, 3), "SC": Fraction(2, 3),
                  "PF": Fraction(4, 5), "AR": Fraction(0, 2)}
        for d, frac in expect.items():
            assert mp.present[d]
            assert Fraction(*mp.counts[d]) == frac
            assert mp.values[d] == frac.numerator / frac.denominator

    def test_dimension_without_indicators_is_absent(self):
        rubric = IndicatorSet(problem_id="p", indicators=[
            Indicator.from_code("CU1", "a"), Indicator.from_code("PF1", "b")])
        mp = compute_mp_ratios(rubric, {"CU1": 1, "PF1": 0})
        assert mp.present == {"CU": True, "SC": False, "PF": True, "AR": False}
        assert mp.counts["SC"] == (0, 0)

    def test_incomplete_verdicts_rejected(self):
        with pytest.raises(IncompleteVerdictError):
            compute_mp_ratios(fixed_indicators(), {"CU1": 1})

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.sampled_from(["CU", "SC", "PF", "AR"]),
                              st.booleans()), min_size=1, max_size=20),
           st.data())
    def test_flipping_verdict_up_never_lowers_a_ratio(self, spec, data):
        ordinals = {"CU": 0, "SC": 0, "PF": 0, "AR": 0}
        inds, verdicts = [], {}
        for cat, sat in spec:
            ordinals[cat] += 1
            code = f"{cat}{ordinals[cat]}"
            inds.append(Indicator.from_code(code, "step"))
            verdicts[code] = int(sat)
        rubric = IndicatorSet(problem_id="p", indicators=inds)
        before = compute_mp_ratios(rubric, verdicts)
        flip = data.draw(st.sampled_from(sorted(verdicts)))
        bumped = dict(verdicts, **{flip: 1})
        after = compute_mp_ratios(rubric, bumped)
        for d in ("CU", "SC", "PF", "AR"):
            assert after.values[d] >= before.values[d]


# -- end-to-end over the mock client --------------------------------------

class FaultyClient:
    """Wraps the mock and errors on stage-2 prompts containing a marker."""

    def __init__(self, inner, marker):
        self.inner = inner
        self.marker = marker

    def complete(self, system_message, user_message, params):
        if (user_message.startswith("You are Student GPT")
                and self.marker in user_message):
            raise ChatClientError("injected transport failure")
        return self.inner.complete(system_message, user_message, params)


class TestRunPipeline:
    def test_annotates_every_interaction(self, tmp_path):
        data = make_dataset(num_students=3, steps=4)
        client = MockChatClient()
        out, report = run_pipeline(data, client, tmp_path)
        assert report.annotated == 12 and report.failed == 0
        for seq in out.sequences:
            for rec in seq.steps:
                assert rec.mp is not None
                rec.mp.validate()
                assert any(rec.mp.present.values())

    def test_stage_one_shared_per_problem(self, tmp_path):
        data = make_dataset(num_students=3, steps=4)
        client = MockChatClient()
        run_pipeline(data, client, tmp_path)
        # 12 interactions over 4 distinct problems; stage-2/3 prompts repeat
        # across students here (same trace and answer), so the completion
        # cache collapses each stage to one call per problem
        assert client.calls == 12

    def test_deterministic_across_fresh_caches(self, tmp_path):
        data = make_dataset()
        out1, _ = run_pipeline(data, MockChatClient(), tmp_path / "a")
        out2, _ = run_pipeline(data, MockChatClient(), tmp_path / "b")
        for s1, s2 in zip(out1.sequences, out2.sequences):
            for r1, r2 in zip(s1.steps, s2.steps):
                assert r1.mp.to_json() == r2.mp.to_json()

    def test_warm_rerun_makes_no_calls(self, tmp_path):
        data = make_dataset()
        run_pipeline(data, MockChatClient(), tmp_path)
        client = MockChatClient()
        out, report = run_pipeline(data, client, tmp_path)
        assert client.calls == 0
        assert report.cached == 12
        assert all(rec.mp is not None for seq in out.sequences for rec in seq.steps)

    def test_concurrency_matches_serial(self, tmp_path):
        data = make_dataset()
        out1, _ = run_pipeline(data, MockChatClient(), tmp_path / "serial")
        out2, _ = run_pipeline(data, MockChatClient(), tmp_path / "pool", concurrency=4)
        for s1, s2 in zip(out1.sequences, out2.sequences):
            for r1, r2 in zip(s1.steps, s2.steps):
                assert r1.mp.to_json() == r2.mp.to_json()

    def test_failures_flagged_and_run_continues(self, tmp_path):
        data = make_dataset(num_students=3, steps=4)
        marker = "XFAULTX"
        bad = data.sequences[1].steps[2]
        bad.process_text = bad.process_text + f"\n{marker}"
        client = FaultyClient(MockChatClient(), marker)
        out, report = run_pipeline(data, client, tmp_path)
        assert report.failed == 1 and report.annotated == 11
        assert report.failures == [audit_key(bad)]
        failed_mp = out.sequences[1].steps[2].mp
        assert not any(failed_mp.present.values())

    def test_failed_audit_persists_for_rerun(self, tmp_path):
        data = make_dataset(num_students=3, steps=4)
        marker = "XFAULTX"
        data.sequences[0].steps[0].process_text += f"\n{marker}"
        run_pipeline(data, FaultyClient(MockChatClient(), marker), tmp_path)
        client = MockChatClient()
        _, report = run_pipeline(data, client, tmp_path)
        assert client.calls == 0
        assert report.failed == 1 and report.cached == 12

    def test_audit_records_reconstruct_ratios(self, tmp_path):
        data = make_dataset(num_students=1, steps=2)
        out, _ = run_pipeline(data, MockChatClient(), tmp_path)
        for step_i, rec in enumerate(data.sequences[0].steps):
            doc = json.loads((tmp_path / "audit" / f"{audit_key(rec)}.json").read_text())
            assert doc["status"] == "ok"
            recomputed = {}
            for cat in ("CU", "SC", "PF", "AR"):
                members = [c for entry in doc["indicators"] for c in entry
                           if c.startswith(cat)]
                if members:
                    recomputed[cat] = (sum(doc["verdicts"][c] for c in members),
                                       len(members))
            assert doc["ratios"]["counts"] == {
                d: list(recomputed.get(d, (0, 0))) for d in ("CU", "SC", "PF", "AR")}
            assert out.sequences[0].steps[step_i].mp.to_json() == doc["ratios"]


# -- HTTP client ----------------------------------------------------------

class StubResponse:
    def __init__(self, status, doc):
        self.status_code = status
        self._doc = doc

    def raise_for_status(self):
        import requests
        if self.status_code >= 400:
            raise requests.HTTPError(f"status {self.status_code}")

    def json(self):
        return self._doc


class StubSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.requests = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.requests.append({"url": url, "json": json, "headers": headers})
        return self.responses.pop(0)


def ok_response(text):
    return StubResponse(200, {"choices": [{"message": {"content": text}}]})


class TestHttpChatClient:
    def test_success_returns_first_choice_content(self):
        session = StubSession([ok_response("hello")])
        client = HttpChatClient(endpoint="http://unit.test/v1", model="m",
                                api_key="k", session=session)
        got = client.complete("sys", "user", ChatParams())
        assert got == "hello"
        sent = session.requests[0]
        assert sent["json"]["model"] == "m"
        assert sent["json"]["temperature"] == 0.0
        assert sent["json"]["messages"] == [
            {"role": "system", "content": "sys"},
            {"role": "user", "content": "user"}]
        assert sent["headers"]["Authorization"] == "Bearer k"

    def test_retries_then_succeeds(self):
        session = StubSession([StubResponse(500, {}), ok_response("recovered")])
        client = HttpChatClient(endpoint="http://unit.test/v1", session=session,
                                backoff=0.0)
        assert client.complete("", "user", ChatParams()) == "recovered"
        assert len(session.requests) == 2

    def test_raises_after_exhausting_retries(self):
        session = StubSession([StubResponse(500, {})] * 3)
        client = HttpChatClient(endpoint="http://unit.test/v1", session=session,
                                backoff=0.0)
        with pytest.raises(ChatClientError):
            client.complete("", "user", ChatParams(max_retries=3))
        assert len(session.requests) == 3

    def test_missing_endpoint_rejected(self, monkeypatch):
        monkeypatch.delenv("PROCKT_CHAT_ENDPOINT", raising=False)
        with pytest.raises(ChatClientError):
            HttpChatClient()


# -- mock client schema ---------------------------------------------------

class TestMockChatClient:
    def test_stage_one_covers_every_dimension(self, problem):
        client = MockChatClient()
        raw = client.complete("", render_indicator_prompt(problem), ChatParams())
        rubric = parse_indicators(raw, problem.problem_id)
        assert 8 <= len(rubric.indicators) <= 15
        assert all(rubric.by_category()[d] for d in ("CU", "SC", "PF", "AR"))

    def test_outputs_are_pure_functions_of_the_prompt(self, problem):
        prompt = render_indicator_prompt(problem)
        a = MockChatClient().complete("", prompt, ChatParams())
        b = MockChatClient().complete("", prompt, ChatParams())
        assert a == b

    def test_full_three_stage_round_trip(self, problem):
        client = MockChatClient()
        rubric = parse_indicators(
            client.complete("", render_indicator_prompt(problem), ChatParams()),
            problem.problem_id)
        p2 = render_student_prompt(problem, rubric, FIXED_PROCESS, "2")
        responses = parse_responses(client.complete("", p2, ChatParams()), rubric)
        p3 = render_eval_prompt(problem, rubric, responses)
        verdicts = parse_verdicts(client.complete("", p3, ChatParams()), rubric)
        mp = compute_mp_ratios(rubric, verdicts)
        mp.validate()
        for code, text in responses.items():
            if text == "I don't know":
                assert verdicts[code] == 0
