import json
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intentbench.dataset import CLASS_ORDER, Corpus, LabeledUtterance, synthesize_corpus
from intentbench.errors import (ConfigError, ExhaustedRetries, MissingExamples, ProviderUnavailable,
                                TransportError, UnknownLabel, UnparseableResponse)
from intentbench.llm_router import (EXAMPLES_HEADER, FORMAT_REMINDER, CompletionRequest, ExampleBudget,
                                    HttpTransport, LlmClassifier, MockTransport, PromptTemplate, build_prompt,
                                    classify, classify_many, keyword_responder, parse_verdict, select_examples)

from conftest import json_server

C, S, D = CLASS_ORDER


def corpus_with(counts, seed=0):
    return Corpus([LabeledUtterance(f"{lab.value} sample {i}", lab)
                   for lab, n in zip(CLASS_ORDER, counts) for i in range(n)])


def definitions_section(prompt):
    return prompt.split("Classes:\n", 1)[1].split("\n\n", 1)[0]


def examples_json(prompt):
    block = prompt.split(EXAMPLES_HEADER + ":\n", 1)[1]
    return json.JSONDecoder().raw_decode(block)[0]


class TestPrompt:
    def test_simple(self):
        p = build_prompt("hola", "simple")
        assert "Message: hola" in p
        for lab in CLASS_ORDER:
            assert lab.value in p
        assert EXAMPLES_HEADER not in p

    def test_names_once_in_definitions(self):
        defs = definitions_section(build_prompt("x", "simple"))
        for lab in CLASS_ORDER:
            assert len(re.findall(rf"\b{lab.value}\b", defs)) == 1

    def test_augmented_counts(self):
        ex = select_examples(corpus_with((2, 2, 2)))
        objs = examples_json(build_prompt("hola", "augmented", ex))
        assert len(objs) == 6
        assert all(set(o) == {"text", "class"} for o in objs)

    def test_augmented_needs_examples(self):
        with pytest.raises(MissingExamples):
            build_prompt("hola", "augmented")
        with pytest.raises(MissingExamples):
            build_prompt("hola", "augmented", [])

    def test_question_verbatim(self):
        q = 'tricky {examples} "quotes" and {question}\nnewline'
        assert q in build_prompt(q, "simple")

    def test_empty_question(self):
        with pytest.raises(ConfigError):
            build_prompt("   ", "simple")

    def test_custom_template(self, tmp_path):
        path = tmp_path / "t.txt"
        path.write_text("Q={question}|E={examples}")
        t = PromptTemplate.load(path)
        assert build_prompt("hi", "simple", template=t) == "Q=hi|E="
        with pytest.raises(ConfigError):
            PromptTemplate("no placeholder")

    def test_request_defaults(self):
        r = CompletionRequest("p")
        assert (r.max_tokens, r.temperature) == (50, 0.0)
        with pytest.raises(ConfigError):
            CompletionRequest("p", max_tokens=0)
        with pytest.raises(ConfigError):
            CompletionRequest("p", temperature=-0.1)


class TestSelect:
    def test_all_when_under_caps(self):
        ex = select_examples(corpus_with((500, 26, 140)))
        assert [sum(u.label is lab for u in ex) for lab in CLASS_ORDER] == [500, 26, 140]

    def test_capped_and_seeded(self):
        corpus = corpus_with((1000, 26, 140))
        a = select_examples(corpus, seed=1)
        assert [sum(u.label is lab for u in a) for lab in CLASS_ORDER] == [500, 26, 140]
        assert a == select_examples(corpus, seed=1)
        assert a != select_examples(corpus, seed=2)

    def test_empty_class(self):
        ex = select_examples(corpus_with((5, 0, 3)))
        assert sum(u.label is S for u in ex) == 0

    def test_keeps_corpus_order(self):
        corpus = synthesize_corpus(1200, seed=0)
        ex = select_examples(corpus, seed=0)
        pos = {id(u): i for i, u in enumerate(corpus.items)}
        assert [pos[id(u)] for u in ex] == sorted(pos[id(u)] for u in ex)

    @settings(max_examples=50, deadline=None)
    @given(st.tuples(*[st.integers(0, 60)] * 3), st.tuples(*[st.integers(0, 30)] * 3), st.integers(0, 1000))
    def test_budget_ceiling(self, counts, caps, seed):
        ex = select_examples(corpus_with(counts), ExampleBudget(*caps), seed)
        for lab, n, cap in zip(CLASS_ORDER, counts, caps):
            assert sum(u.label is lab for u in ex) == min(n, cap)


class TestParse:
    @pytest.mark.parametrize("raw,want", [
        ('{"category": "Conversation"}', C),
        ('Sure! {"category":"Document_Translation"}', D),
        ('{"class": "services"}', S),
        ('{"label": "translate document"}', D),
        ('```json\n{"category": "Document Translation"}\n```', D),
        ('{"other": 1} then {"category": "Services"}', S),
        (b'{"category": "Services"}', S),
    ])
    def test_accepts(self, raw, want):
        assert parse_verdict(raw) is want

    @pytest.mark.parametrize("raw", ["I think it is a conversation.", "", "{", '{"foo": "bar"}', "[1,2]"])
    def test_unparseable(self, raw):
        with pytest.raises(UnparseableResponse) as exc:
            parse_verdict(raw)
        assert exc.value.raw == raw

    @pytest.mark.parametrize("raw", ['{"category": "Weather"}', '{"category": 3}', '{"category": null}'])
    def test_unknown(self, raw):
        with pytest.raises(UnknownLabel):
            parse_verdict(raw)

    def test_deep_nesting(self):
        with pytest.raises((UnparseableResponse, UnknownLabel)):
            parse_verdict("{" + '"a":[' * 5000)
        with pytest.raises(UnparseableResponse):
            parse_verdict('{"a":' + "[" * 100000 + "]" * 100000 + "}")

    @settings(max_examples=500, deadline=None)
    @given(st.binary(max_size=200))
    def test_total_on_bytes(self, raw):
        try:
            assert parse_verdict(raw) in CLASS_ORDER
        except (UnparseableResponse, UnknownLabel):
            pass


class TestClassify:
    def test_first_try(self):
        t = MockTransport('{"category":"Services"}')
        v = classify("book a table", "simple", t)
        assert v.label is S and v.parse_attempts == 1 and v.latency >= 0
        req = t.requests[0]
        assert (req.temperature, req.max_tokens) == (0.0, 50)

    def test_retry_then_ok(self):
        t = MockTransport(["garbage", '{"category":"Conversation"}'])
        v = classify("hola", "simple", t, retries=2)
        assert v.label is C and v.parse_attempts == 2
        assert t.requests[1].prompt.endswith(FORMAT_REMINDER + "\n")
        assert not t.requests[0].prompt.endswith(FORMAT_REMINDER + "\n")

    def test_exhausted(self):
        t = MockTransport("garbage")
        with pytest.raises(ExhaustedRetries) as exc:
            classify("hola", "simple", t, retries=1)
        assert exc.value.last_raw == "garbage" and len(t.requests) == 2

    def test_no_label_override(self):
        # the hierarchy lives in the prompt only; the parsed label is returned as is
        v = classify("hola", "simple", MockTransport('{"category":"Services"}'))
        assert v.label is S

    def test_transport_error_propagates(self):
        def broken(request):
            raise TransportError("down")

        with pytest.raises(TransportError):
            classify("hola", "simple", broken)

    def test_many_keeps_order(self):
        qs = ["book a hotel room", "translate report.pdf to French", "hello"] * 4
        t = MockTransport(keyword_responder)
        serial = [v.label for v in classify_many(qs, "simple", t)]
        parallel = [v.label for v in classify_many(qs, "simple", t, max_in_flight=4)]
        assert serial == parallel == [S, D, C] * 4

    def test_prompt_determinism_across_variants(self):
        ex = select_examples(synthesize_corpus(300, seed=0), seed=7)
        for variant, examples in (("simple", None), ("augmented", ex)):
            a, b = MockTransport(), MockTransport()
            classify("translate memo.pdf to German", variant, a, examples=examples)
            classify("translate memo.pdf to German", variant, b, examples=examples)
            assert a.requests[0].prompt.encode() == b.requests[0].prompt.encode()

    def test_adapter(self):
        clf = LlmClassifier(MockTransport('{"category":"Conversation"}'))
        label, verdict = clf.predict("hi")
        assert label is C and verdict.raw_response


class TestHttpTransport:
    def test_wire_shape(self, monkeypatch):
        monkeypatch.setenv("LLM_TOKEN", "abc")
        with json_server(lambda p, h: (200, {"text": '{"category": "Services"}'})) as (url, calls):
            v = classify("book", "simple", HttpTransport(url, "LLM_TOKEN"), model_id="m1")
        payload, headers = calls[0]
        assert set(payload) == {"prompt", "max_tokens", "temperature", "model_id"}
        assert payload["model_id"] == "m1" and payload["max_tokens"] == 50 and payload["temperature"] == 0.0
        assert headers["Authorization"] == "Bearer abc"
        assert v.label is S

    def test_http_error(self):
        with json_server(lambda p, h: (503, "throttled")) as (url, _):
            with pytest.raises(ProviderUnavailable):
                HttpTransport(url)(CompletionRequest("p"))

    def test_bad_body(self):
        with json_server(lambda p, h: (200, {"nope": 1})) as (url, _):
            with pytest.raises(TransportError):
                HttpTransport(url)(CompletionRequest("p"))

    def test_unreachable(self):
        with pytest.raises(TransportError):
            HttpTransport("http://127.0.0.1:9/", timeout=1.0)(CompletionRequest("p"))
