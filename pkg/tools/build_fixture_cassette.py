#!/usr/bin/env python3
"""Record the desk-scale fixture cassette shipped under data/cassettes/.

Runs the whole pipeline against deterministic scripted backends and records
every exchange.  The resulting cassette replays the sample config offline:

    python tools/build_fixture_cassette.py

Scripted behavior, all derived from the prompt text alone:
  * topic requests answer with hand-written wonder questions per core idea;
  * passage requests compose filler prose around the topic, near the
    requested word count; guided prompts also weave in the core-idea
    sentence so the scripted judge can tell the modes apart;
  * the judge scores alignment by vocabulary overlap with the core idea,
    picks the best-overlapping category, and rates comprehensibility with
    stable per-passage scores.
"""

from __future__ import annotations

import hashlib
import json
import re
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from passagelab.config import load_config  # noqa: E402
from passagelab.gateway import (  # noqa: E402
    BackendConfig,
    CassetteRecorder,
    ChatRequest,
    Gateway,
    TransportReply,
)
from passagelab.promptkit import Mode  # noqa: E402
from passagelab.runner import (  # noqa: E402
    ingest_curriculum,
    ingest_reference_corpus,
    run_judging,
    run_passage_generation,
    run_readability,
    run_topic_generation,
)
from passagelab.store import RunStore  # noqa: E402

FROZEN_TS = "2026-01-15T00:00:00+00:00"

TOPICS_BY_CORE_IDEA = {
    "LS1.A": [
        "Why do ducks have webbed feet?",
        "How does a rabbit use its long ears?",
        "What do plants use their leaves for?",
        "Why do cats have sharp claws?",
        "How do fish use their fins to swim?",
    ],
    "LS1.B": [
        "Why do baby birds follow their mother?",
        "How does a mother bear keep her cubs safe?",
        "What do puppies learn from their mother?",
        "Why do kittens copy big cats?",
        "How do penguin parents feed their chicks?",
    ],
    "PS1.A": [
        "Why is a sponge soft and a rock hard?",
        "How can we sort toys by what they are made of?",
        "Which materials let light shine through?",
        "Why do some things float and others sink?",
        "What makes metal feel cold to touch?",
    ],
    "PS1.B": [
        "Can melted ice become ice again?",
        "What happens when we bake wet dough?",
        "Why does a crayon melt in the sun?",
        "Can burned paper turn back into paper?",
        "What changes when we freeze juice into pops?",
    ],
    "ESS2.A": [
        "How do we know what the weather will be?",
        "Why does it rain more in some months?",
        "Where does rain go after it falls?",
        "What makes the wind blow?",
        "Why do puddles disappear on sunny days?",
    ],
    "ETS1.A": [
        "What makes one paper airplane fly farther than another?",
        "How can we build a stronger bridge from straws?",
        "Why do engineers test their ideas?",
        "How could we design a better umbrella?",
        "What makes a good tool for picking up ice cubes?",
    ],
}

STOPWORDS = frozenset(
    "a an and are be can do does for from has have how in is it its of on or "
    "the their them they this to use we what when where which why with".split()
)

FILLER = [
    "Look around and you can spot this idea at home and at school.",
    "Scientists watch closely and write down what they see.",
    "Children ask this question all the time, and it is a good one.",
    "Think about what you already know, then look for clues.",
    "Every example we find helps the idea make more sense.",
    "A careful look at the world turns a puzzle into a plan.",
    "Talk about it with a friend and compare what you both notice.",
    "Small observations add up to a big discovery.",
]

# Vocabulary pool for the deterministic sentence spinner, so longer mock
# passages grow in lexical diversity the way real prose does.
WORD_POOL = (
    "morning garden window stream meadow pebble branch cloud shadow breeze "
    "summer winter autumn spring kitchen market library playground teacher "
    "farmer sailor painter helper neighbor puzzle pattern measure record "
    "notice wonder explore compare collect gather sketch chart journal "
    "question answer reason evidence example detail moment journey story "
    "forest valley river ocean island desert mountain prairie harbor trail "
    "quietly slowly quickly gently bravely carefully proudly together "
    "bright shiny smooth rough sturdy fragile curious patient clever eager "
    "lantern bucket basket ladder magnet ribbon marble feather acorn seed"
).split()


def _spinner_sentence(key: str, index: int) -> str:
    pick = lambda k: WORD_POOL[_stable_int(f"{key}:{index}:{k}", len(WORD_POOL))]  # noqa: E731
    return (
        f"One {pick('a')} {pick('b')} showed us a {pick('c')} {pick('d')} "
        f"near the {pick('e')}, and we wrote it in our {pick('f')}."
    )


def _content_words(text: str) -> set[str]:
    return {
        w
        for w in re.findall(r"[a-z']+", text.lower())
        if len(w) >= 4 and w not in STOPWORDS
    }


def _stable_int(text: str, modulus: int) -> int:
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big") % modulus


def _block(prompt: str, header: str) -> str:
    pattern = re.compile(re.escape(header) + r"\n(.*?)(?:\n===|\Z)", re.DOTALL)
    match = pattern.search(prompt)
    return match.group(1).strip() if match else ""


class ScriptedModel:
    """Deterministic stand-in for one generation backend."""

    def __init__(self, style: str, length_bias: dict[str, float]):
        self.style = style
        self.length_bias = length_bias

    def send(self, config: BackendConfig, request: ChatRequest) -> TransportReply:
        prompt = request.user_text
        if "different topics in the form of a short question" in prompt:
            return TransportReply(self._topics(prompt), timestamp=FROZEN_TS, latency=0.0)
        if "-word reading passage" in prompt:
            return TransportReply(self._passage(prompt), timestamp=FROZEN_TS, latency=0.0)
        raise ValueError(f"scripted model got an unexpected prompt: {prompt[:60]}...")

    def _topics(self, prompt: str) -> str:
        core = _content_words(_block(prompt, "=== Core Ideas ==="))
        best_id, best_overlap = None, -1.0
        for core_id in TOPICS_BY_CORE_IDEA:
            overlap = len(core & CORE_IDEA_WORDS[core_id])
            if overlap > best_overlap:
                best_id, best_overlap = core_id, overlap
        n = int(re.search(r"generate (\d+) different topics", prompt).group(1))
        chosen = TOPICS_BY_CORE_IDEA[best_id][:n]
        return "\n".join(f"{i + 1}. {t}" for i, t in enumerate(chosen))

    def _passage(self, prompt: str) -> str:
        target = int(re.search(r"a (\d+)-word reading passage", prompt).group(1))
        topic = _block(prompt, "=== Wonder Topic ===")
        core = _block(prompt, "=== Core Ideas ===")
        guided = bool(core)
        mode_key = "cogent" if guided else "base"
        goal = int(target * self.length_bias[mode_key])
        sentences = [f"{topic} Let's find out together."]
        if guided:
            core_text = core.replace("What the student needs to learn:", "").strip()
            sentences.append(core_text)
            sentences.append(
                "Keep those words in mind: they are the science idea behind our question."
            )
        key = self.style + topic + mode_key
        offset = _stable_int(key, len(FILLER))
        i = 0
        while sum(len(s.split()) for s in sentences) < goal:
            if i % 2 == 0:
                sentences.append(FILLER[(offset + i) % len(FILLER)])
            else:
                sentences.append(_spinner_sentence(key, i))
            if guided and i % 4 == 2:
                sentences.append(core_text.split(".")[0] + ".")
            i += 1
        return " ".join(sentences)


class ScriptedJudge:
    """Deterministic judge: overlap-based alignment and categorization."""

    def send(self, config: BackendConfig, request: ChatRequest) -> TransportReply:
        prompt = request.user_text
        if "Rate its curriculum alignment" in prompt:
            return TransportReply(self._alignment(prompt), timestamp=FROZEN_TS, latency=0.0)
        if "Classify the science reading passage" in prompt:
            return TransportReply(self._categorize(prompt), timestamp=FROZEN_TS, latency=0.0)
        if "Rate its comprehensibility" in prompt:
            return TransportReply(
                self._comprehensibility(prompt), timestamp=FROZEN_TS, latency=0.0
            )
        raise ValueError(f"scripted judge got an unexpected prompt: {prompt[:60]}...")

    @staticmethod
    def _passage_block(prompt: str) -> str:
        return prompt.split("[Input Passage Content]", 1)[1]

    def _alignment(self, prompt: str) -> str:
        core = re.search(r"Core Ideas: (.+)", prompt).group(1)
        passage_words = _content_words(self._passage_block(prompt))
        core_words = _content_words(core)
        overlap = len(core_words & passage_words) / max(1, len(core_words))
        if overlap >= 0.45:
            score = 5
        elif overlap >= 0.18:
            score = 4
        elif overlap >= 0.04:
            score = 3
        else:
            score = 2
        return f"Alignment Score: {score}"

    def _categorize(self, prompt: str) -> str:
        passage_words = _content_words(self._passage_block(prompt))
        blocks = re.findall(r'"Type": "([A-Z]+)",.*?"Core Ideas": "(.*?)",', prompt, re.DOTALL)
        best_label, best_overlap = blocks[0][0], -1.0
        for label, core in blocks:
            overlap = len(_content_words(core) & passage_words)
            if overlap > best_overlap:
                best_label, best_overlap = label, overlap
        return f"Predicted Type: {best_label}"

    def _comprehensibility(self, prompt: str) -> str:
        passage = self._passage_block(prompt)
        scores = [4 + _stable_int(aspect + passage, 2) for aspect in "rcce"]
        return (
            f"Readability: {scores[0]}, Correctness: {scores[1]}, "
            f"Coherence: {scores[2]}, Engagement: {scores[3]}"
        )


def main() -> int:
    config = load_config(REPO / "data" / "sample_config.json")
    cassette_path = REPO / "data" / "cassettes" / "desk.jsonl"
    if cassette_path.exists():
        cassette_path.unlink()
    recorder = CassetteRecorder(cassette_path)

    length_bias = {
        "alpha-lm": {"base": 1.18, "cogent": 0.97},
        "beta-lm": {"base": 1.10, "cogent": 1.02},
        "gamma-lm": {"base": 1.24, "cogent": 0.94},
    }
    gateways = {
        cfg.backend_id: Gateway(
            cfg, ScriptedModel(cfg.backend_id, length_bias[cfg.backend_id]), recorder=recorder
        )
        for cfg in config.backends
    }
    judge = Gateway(config.judge, ScriptedJudge(), recorder=recorder)

    workdir = Path(tempfile.mkdtemp(prefix="cassette-build-"))
    try:
        run = RunStore(workdir, "fixture")
        ingest_curriculum(run, REPO / "data" / "sample_catalog.json")
        ingest_reference_corpus(run, REPO / "data" / "sample_corpus.json")
        topics = run_topic_generation(
            run,
            gateways[config.topic_backend],
            n_generate=config.n_topics_generate,
            n_select=config.n_topics_select,
            seed=config.seed,
        )
        total = 0
        for backend_id, gateway in gateways.items():
            for mode in (Mode.BASE, Mode.COGENT):
                total += len(
                    run_passage_generation(
                        run, mode, gateway, passages_per_topic=config.passages_per_topic
                    )
                )
        run_readability(run, grade_margin=config.grade_margin)
        counts = run_judging(run, judge, repetitions=config.judge_repetitions)
        lines = sum(1 for _ in open(cassette_path, encoding="utf-8"))
        print(f"topics: {len(topics)}  passages: {total}  judge calls: {counts}")
        print(f"cassette: {cassette_path} ({lines} transcripts)")
    finally:
        shutil.rmtree(workdir, ignore_errors=True)
    return 0


CORE_IDEA_WORDS = {}


def _index_core_ideas() -> None:
    catalog = json.loads((REPO / "data" / "sample_catalog.json").read_text("utf-8"))
    for concept in catalog["concepts"]:
        for idea in concept["core_ideas"]:
            CORE_IDEA_WORDS[idea["id"]] = _content_words(idea["text"])


_index_core_ideas()

if __name__ == "__main__":
    sys.exit(main())
