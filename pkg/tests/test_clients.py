import base64
import json

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polyextract import (
    DataError,
    HttpModelClient,
    RetryPolicy,
    ScriptedClient,
    UpstreamError,
    UsageError,
    load_clients_config,
    load_transcript,
    request_key,
)
from polyextract.clients import detect_media_type
from helpers import PNG_1PX


class TestRequestKey:
    def test_is_short_hex(self):
        key = request_key("hello")
        assert len(key) == 16
        assert set(key) <= set("0123456789abcdef")

    def test_image_changes_key(self):
        assert request_key("p") != request_key("p", b"img")

    def test_different_images_differ(self):
        assert request_key("p", b"a") != request_key("p", b"b")

    @given(st.text(), st.text())
    def test_deterministic(self, a, b):
        assert (request_key(a) == request_key(b)) == (a == b) or a != b
        assert request_key(a) == request_key(a)


class TestScriptedClient:
    def test_static_response_repeats(self):
        client = ScriptedClient({request_key("q"): "answer"})
        assert client.complete_text("q") == "answer"
        assert client.complete_text("q") == "answer"
        assert client.requests_served == 2

    def test_queue_consumed_in_order(self):
        client = ScriptedClient({request_key("q"): ["first", "second"]})
        assert client.complete_text("q") == "first"
        assert client.complete_text("q") == "second"

    def test_exhausted_queue_raises(self):
        client = ScriptedClient({request_key("q"): ["only"]})
        client.complete_text("q")
        with pytest.raises(UpstreamError, match="exhausted"):
            client.complete_text("q")

    def test_unknown_request_names_key(self):
        client = ScriptedClient({})
        with pytest.raises(UpstreamError, match=request_key("surprise")):
            client.complete_text("surprise")

    def test_multimodal_keying(self):
        key = request_key("describe", b"imagebytes")
        client = ScriptedClient({key: "a chart"})
        assert client.complete_multimodal("describe", b"imagebytes") == "a chart"
        with pytest.raises(UpstreamError):
            client.complete_multimodal("describe", b"otherbytes")

    def test_bad_entry_type_rejected(self):
        with pytest.raises(DataError):
            ScriptedClient({"k": 42})


class TestLoadTranscript:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(
            json.dumps(
                {"identity": "replay-1", "responses": {request_key("q"): "ans"}}
            )
        )
        client = load_transcript(path)
        assert client.identity == "replay-1"
        assert client.complete_text("q") == "ans"

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_transcript(tmp_path / "absent.json")

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text("{nope")
        with pytest.raises(DataError, match="malformed"):
            load_transcript(path)

    def test_missing_responses_map(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"identity": "x"}))
        with pytest.raises(DataError, match="responses"):
            load_transcript(path)


class TestDetectMediaType:
    @pytest.mark.parametrize(
        "payload,expected",
        [
            (PNG_1PX, "image/png"),
            (b"\xff\xd8\xff\xe0rest", "image/jpeg"),
            (b"GIF89a...", "image/gif"),
            (b"BMxxxx", "image/bmp"),
            (b"RIFF\x00\x00\x00\x00WEBPVP8", "image/webp"),
            (b"unknown bytes", "image/png"),
        ],
    )
    def test_magic_bytes(self, payload, expected):
        assert detect_media_type(payload) == expected


def ok_response(text="hello"):
    return httpx.Response(
        200, json={"choices": [{"message": {"content": text}}]}
    )


class TestHttpModelClient:
    def make(self, handler, **kwargs):
        kwargs.setdefault("retry", RetryPolicy(max_attempts=3, backoff_seconds=0.5))
        sleeps: list[float] = []
        client = HttpModelClient(
            "https://api.example.test/v1",
            "model-x",
            "sekrit",
            transport=httpx.MockTransport(handler),
            sleep=sleeps.append,
            **kwargs,
        )
        return client, sleeps

    def test_success_and_request_shape(self):
        seen = {}

        def handler(request: httpx.Request) -> httpx.Response:
            seen["url"] = str(request.url)
            seen["auth"] = request.headers.get("Authorization")
            seen["body"] = json.loads(request.content)
            return ok_response("out")

        client, _ = self.make(handler)
        with client:
            assert client.complete_text("the prompt") == "out"
        assert seen["url"].endswith("/chat/completions")
        assert seen["auth"] == "Bearer sekrit"
        body = seen["body"]
        assert body["model"] == "model-x"
        assert body["temperature"] == 0
        assert body["messages"] == [{"role": "user", "content": "the prompt"}]

    def test_multimodal_body_inlines_image(self):
        seen = {}

        def handler(request: httpx.Request) -> httpx.Response:
            seen["body"] = json.loads(request.content)
            return ok_response()

        client, _ = self.make(handler)
        with client:
            client.complete_multimodal("describe", PNG_1PX)
        content = seen["body"]["messages"][0]["content"]
        assert content[0] == {"type": "text", "text": "describe"}
        url = content[1]["image_url"]["url"]
        prefix = "data:image/png;base64,"
        assert url.startswith(prefix)
        assert base64.b64decode(url[len(prefix):]) == PNG_1PX

    def test_retries_on_500_then_succeeds(self):
        calls = []

        def handler(request: httpx.Request) -> httpx.Response:
            calls.append(1)
            if len(calls) < 3:
                return httpx.Response(500, text="boom")
            return ok_response("finally")

        client, sleeps = self.make(handler)
        with client:
            assert client.complete_text("p") == "finally"
        assert len(calls) == 3
        assert sleeps == [0.5, 1.0]

    def test_retries_on_429(self):
        calls = []

        def handler(request: httpx.Request) -> httpx.Response:
            calls.append(1)
            if len(calls) == 1:
                return httpx.Response(429, text="slow down")
            return ok_response()

        client, _ = self.make(handler)
        with client:
            client.complete_text("p")
        assert len(calls) == 2

    def test_client_error_fails_immediately(self):
        calls = []

        def handler(request: httpx.Request) -> httpx.Response:
            calls.append(1)
            return httpx.Response(400, text="bad request")

        client, sleeps = self.make(handler)
        with client, pytest.raises(UpstreamError, match="HTTP 400"):
            client.complete_text("p")
        assert len(calls) == 1
        assert sleeps == []

    def test_transport_error_retried_then_gives_up(self):
        def handler(request: httpx.Request) -> httpx.Response:
            raise httpx.ConnectError("refused")

        client, sleeps = self.make(handler)
        with client, pytest.raises(UpstreamError, match="giving up after 3"):
            client.complete_text("p")
        assert sleeps == [0.5, 1.0]

    def test_non_json_body_rejected(self):
        client, _ = self.make(lambda request: httpx.Response(200, text="<html>"))
        with client, pytest.raises(UpstreamError, match="non-JSON"):
            client.complete_text("p")

    def test_missing_content_rejected(self):
        client, _ = self.make(
            lambda request: httpx.Response(200, json={"choices": []})
        )
        with client, pytest.raises(UpstreamError, match="choices"):
            client.complete_text("p")


class TestLoadClientsConfig:
    def write_config(self, tmp_path, payload):
        path = tmp_path / "clients.json"
        path.write_text(json.dumps(payload))
        return path

    def test_builds_clients_for_roles(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TEST_KEY", "abc")
        path = self.write_config(
            tmp_path,
            {
                "text": {
                    "base_url": "https://x.test",
                    "model": "m1",
                    "api_key_env": "TEST_KEY",
                },
                "vision": {
                    "base_url": "https://x.test",
                    "model": "m2",
                    "api_key_env": "TEST_KEY",
                    "identity": "eyes",
                },
            },
        )
        clients = load_clients_config(path)
        assert set(clients) == {"text", "vision"}
        assert clients["text"].identity == "m1"
        assert clients["vision"].identity == "eyes"

    def test_missing_env_var_is_usage_error(self, tmp_path, monkeypatch):
        monkeypatch.delenv("ABSENT_KEY", raising=False)
        path = self.write_config(
            tmp_path,
            {"text": {"base_url": "https://x.test", "model": "m", "api_key_env": "ABSENT_KEY"}},
        )
        with pytest.raises(UsageError, match="ABSENT_KEY"):
            load_clients_config(path)

    def test_unknown_role_rejected(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TEST_KEY", "abc")
        path = self.write_config(
            tmp_path,
            {"oracle": {"base_url": "https://x.test", "model": "m", "api_key_env": "TEST_KEY"}},
        )
        with pytest.raises(DataError, match="oracle"):
            load_clients_config(path)

    def test_text_role_required(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TEST_KEY", "abc")
        path = self.write_config(
            tmp_path,
            {"vision": {"base_url": "https://x.test", "model": "m", "api_key_env": "TEST_KEY"}},
        )
        with pytest.raises(DataError, match="text"):
            load_clients_config(path)

    def test_missing_field_named(self, tmp_path):
        path = self.write_config(tmp_path, {"text": {"base_url": "https://x.test"}})
        with pytest.raises(DataError, match="model"):
            load_clients_config(path)
