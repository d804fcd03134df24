"""Tour of the QA pipeline: transcripts in, OEQA and MCQA out.

Uses the deterministic language-model double, so the output is stable.

Run:  python3 demos/qa_pipeline.py
"""
import random

from pointscribe.clients import MockLanguageModelClient
from pointscribe.export import render_mcqa_turns
from pointscribe.model import QACategory, QAKind
from pointscribe.qa import SceneTranscriptBundle, extract_oeqa, generate_mcqa, summarize_captions

SCENES = {
    "kitchen-1": ["oven", "kettle", "stool", "sink", "tray"],
    "kitchen-2": ["fridge", "toaster", "bench", "mug", "jar"],
    "market-1": ["cart", "shelf", "register", "basket", "scale"],
}
SUBCATEGORY = {"kitchen-1": "Kitchen", "kitchen-2": "Kitchen", "market-1": "Supermarket"}

# The double answers extraction requests from planted fixtures; a real
# deployment points the same pipeline at an HTTP language-model endpoint.
plants = {}
for scene_id, objects in SCENES.items():
    plants[("OBJECT_PRESENCE", scene_id)] = objects
    plants[("SCENE_CLASSIFICATION", scene_id)] = SUBCATEGORY[scene_id]
    plants[("LOCALIZATION", scene_id)] = objects[0]
    plants[("SIZE_COMPARISON", scene_id)] = objects[1]
    plants[("DISTANCE_REASONING", scene_id)] = objects[2]
    plants[("ANOMALY_DETECTION", scene_id)] = f"The {objects[3]} is floating in mid-air."
client = MockLanguageModelClient(plants)

bundles = {
    scene_id: SceneTranscriptBundle(
        scene_id=scene_id,
        language="en",
        scene_transcripts=(
            f"this is a {SUBCATEGORY[scene_id].lower()} scene",
            f"I can see a {objects[0]} and a {objects[1]} near the entrance",
        ),
        object_transcripts={name: (f"the {name} looks clean and new",) for name in objects},
    )
    for scene_id, objects in SCENES.items()
}

print("== caption summarization ==")
caption = summarize_captions("kitchen-1", "en", bundles["kitchen-1"].scene_transcripts, client=client)
print(f"kitchen-1: {caption.text}")

print("\n== stage 1: open-ended QA ==")
oeqa = {scene_id: extract_oeqa(bundle, client=client) for scene_id, bundle in bundles.items()}
for pair in oeqa["kitchen-1"]:
    print(f"  [{pair.category.value}] {pair.question}")
    print(f"      -> {pair.answer}")

print("\n== stage 2: multiple choice ==")
object_lists = {scene_id: objects for scene_id, objects in SCENES.items()}
anomaly_answers = {
    scene_id: next(p.answer for p in pairs if p.category is QACategory.ANOMALY_DETECTION)
    for scene_id, pairs in oeqa.items()
}
rng = random.Random(7)
for pair in generate_mcqa(oeqa["kitchen-1"], object_lists, rng, anomaly_answers=anomaly_answers):
    assert pair.kind is QAKind.MCQA
    human, gpt = render_mcqa_turns(pair)
    print(f"  [{pair.category.value}]")
    for line in human.splitlines():
        print(f"    {line}")
    print(f"    {gpt}")
