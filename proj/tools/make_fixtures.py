#!/usr/bin/env python3
"""Regenerates the synthetic fixture corpus under data/fixtures.

Deterministic: the same script always writes the same bytes. Two fixtures
come from the pipeline instead:

  replay.jsonl   recorded with `freedst extract --keywords ... --record`, then
                 a few completions edited by hand into messier shapes (chatter,
                 code fences, backtick quotes, one unparseable reply, one junk
                 value). Prompt hashes were left untouched.
  data/golden/*  written by `acceptance --update-goldens`.
"""

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "fixtures"

VALUES = {
    "restaurant": {
        "food": ["asian", "italian", "indian", "chinese"],
        "area": ["east", "west", "centre", "north"],
        "pricerange": ["cheap", "moderate", "expensive"],
        "day": ["monday", "friday", "saturday"],
        "people": ["2", "4", "6"],
    },
    "hotel": {
        "area": ["east", "west", "centre", "north"],
        "pricerange": ["cheap", "moderate", "expensive"],
        "stars": ["3", "4", "5"],
        "parking": ["yes"],
        "day": ["monday", "friday", "saturday"],
        "stay": ["2", "3", "5"],
        "people": ["2", "4", "6"],
    },
    "taxi": {
        "destination": ["cambridge station", "the museum", "the airport"],
        "departure": ["the hotel", "the restaurant", "the college"],
        "leave at": ["17:00", "09:30"],
        "arrive by": ["18:00", "12:15"],
    },
}

PHRASES = {
    ("restaurant", "food"): "I'd like some {v} food",
    ("restaurant", "area"): "a restaurant in the {v} would be good",
    ("restaurant", "pricerange"): "something {v} to eat",
    ("restaurant", "day"): "a table on {v}",
    ("restaurant", "people"): "a table for {v}",
    ("hotel", "area"): "I need a hotel in the {v}",
    ("hotel", "pricerange"): "the hotel should be {v}",
    ("hotel", "stars"): "it should have {v} stars",
    ("hotel", "parking"): "with free parking",
    ("hotel", "day"): "checking in on {v}",
    ("hotel", "stay"): "for {v} nights",
    ("hotel", "people"): "a room for {v} guests",
    ("taxi", "destination"): "I need a taxi to {v}",
    ("taxi", "departure"): "pick me up from {v}",
    ("taxi", "leave at"): "I want to leave at {v}",
    ("taxi", "arrive by"): "I have to arrive by {v}",
}

SYSTEM = [
    "Sure, I can help with that.",
    "I found a few options for you.",
    "Anything else I should know?",
    "Let me check that for you.",
    "Okay, noted.",
]

# Keyword rules for the offline mock. Deliberately imperfect: area and price
# words resolve to the restaurant domain, "5 nights" keeps its unit, and some
# values (the college, 09:30) have no rule at all.
KEYWORDS = [
    ("asian", "restaurant", "food", "asian"),
    ("italian", "restaurant", "food", "italian"),
    ("indian", "restaurant", "food", "indian"),
    ("chinese", "restaurant", "food", "chinese"),
    ("east", "restaurant", "area", "east"),
    ("west", "restaurant", "area", "west"),
    ("centre", "restaurant", "area", "centre"),
    ("north", "restaurant", "area", "north"),
    ("something cheap", "restaurant", "pricerange", "cheap"),
    ("something moderate", "restaurant", "pricerange", "moderate"),
    ("something expensive", "restaurant", "pricerange", "expensive"),
    ("hotel should be cheap", "hotel", "pricerange", "cheap"),
    ("hotel should be moderate", "hotel", "pricerange", "moderate"),
    ("hotel should be expensive", "hotel", "pricerange", "expensive"),
    ("hotel in the east", "hotel", "area", "east"),
    ("hotel in the west", "hotel", "area", "west"),
    ("3 stars", "hotel", "stars", "3"),
    ("4 stars", "hotel", "stars", "4"),
    ("5 stars", "hotel", "stars", "5"),
    ("free parking", "hotel", "parking", "yes"),
    ("2 nights", "hotel", "stay", "2"),
    ("3 nights", "hotel", "stay", "3"),
    ("5 nights", "hotel", "stay", "5 nights"),
    ("table on monday", "restaurant", "day", "monday"),
    ("table on friday", "restaurant", "day", "friday"),
    ("table on saturday", "restaurant", "day", "saturday"),
    ("in on monday", "hotel", "day", "monday"),
    ("in on friday", "hotel", "day", "friday"),
    ("in on saturday", "hotel", "day", "saturday"),
    ("table for 2", "restaurant", "people", "2"),
    ("table for 4", "restaurant", "people", "4"),
    ("table for 6", "restaurant", "people", "6"),
    ("room for 2", "hotel", "people", "2"),
    ("room for 4", "hotel", "people", "4"),
    ("taxi to cambridge station", "taxi", "destination", "cambridge station"),
    ("taxi to the museum", "taxi", "destination", "the museum"),
    ("taxi to the airport", "taxi", "destination", "the airport"),
    ("from the hotel", "taxi", "departure", "the hotel"),
    ("from the restaurant", "taxi", "departure", "the restaurant"),
    ("leave at 17:00", "taxi", "leave at", "17:00"),
    ("arrive by 18:00", "taxi", "arrive by", "18:00"),
    ("arrive by 12:15", "taxi", "arrive by", "12:15"),
]

DENYLIST = [
    "hotel", "restaurant", "taxi", "train", "attraction", "hospital", "police", "bus",
    "pricerange", "price range", "food", "area", "stars", "parking", "internet", "stay",
    "day", "people", "departure", "destination", "leaveat", "leave at", "arriveby",
    "arrive by", "type", "name", "book", "asian", "italian", "cheap", "expensive",
    "east", "west", "centre", "north", "south", "museum", "station",
]


def dialogue(rng: random.Random, idx: int) -> dict:
    domains = rng.sample(sorted(VALUES), rng.choice([1, 2]))
    mentions = []
    for d in domains:
        for slot in rng.sample(sorted(VALUES[d]), rng.randint(2, min(4, len(VALUES[d])))):
            mentions.append((d, slot, rng.choice(VALUES[d][slot])))
    n_user = rng.randint(2, 4)
    per_turn = [[] for _ in range(n_user)]
    for k, m in enumerate(mentions):
        per_turn[min(k * n_user // len(mentions), n_user - 1)].append(m)

    # Every fourth dialogue revises an earlier area or day in its last turn.
    if idx % 4 == 3:
        for d, slot, v in mentions:
            if slot in ("area", "day"):
                alt = [x for x in VALUES[d][slot] if x != v][0]
                per_turn[-1].append((d, slot, alt, "actually, change that: "))
                break

    turns, gold, state = [], [], {}
    for t, items in enumerate(per_turn):
        parts = []
        for item in items:
            d, slot, v = item[:3]
            prefix = item[3] if len(item) > 3 else ""
            parts.append(prefix + PHRASES[(d, slot)].format(v=v))
            state[(d, slot)] = v
        text = " and ".join(parts) if parts else "what would you recommend?"
        text = text[0].upper() + text[1:] + ("" if text.endswith("?") else ".")
        turns.append({"speaker": "user", "text": text})
        gold.append([{"domain": d, "slot": s, "value": v} for (d, s), v in sorted(state.items())])
        if t + 1 < n_user:
            turns.append({"speaker": "system", "text": rng.choice(SYSTEM)})
    return {"dialogue_id": f"fx-{idx:03d}", "turns": turns, "gold": gold}


def write_jsonl(path: Path, rows) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def main() -> None:
    rng = random.Random(7)
    OUT.mkdir(parents=True, exist_ok=True)
    write_jsonl(OUT / "dialogues.jsonl", [dialogue(rng, i) for i in range(20)])
    write_jsonl(OUT / "keywords.jsonl",
                [{"keyword": k, "domain": d, "slot": s, "value": v} for k, d, s, v in KEYWORDS])
    (OUT / "ontology_denylist.txt").write_text(
        "# Ontology vocabulary that must never appear in a template-only prompt.\n" + "\n".join(DENYLIST) + "\n")
    write_jsonl(OUT / "error_cases.jsonl", [
        {"case": "placeholder value",
         "context": ["I need a hotel in the east.", "Sure, which price range?"],
         "gold": [{"domain": "hotel", "slot": "area", "value": "east"}],
         "predicted": [{"domain": "hotel", "slot": "area", "value": "XXXXX"}],
         "expect": {"nonexistent_value": 1, "synonym": 0}},
        {"case": "unit kept",
         "context": ["I want to stay for 5 nights."],
         "gold": [{"domain": "hotel", "slot": "book stay", "value": "5"}],
         "predicted": [{"domain": "hotel", "slot": "book stay", "value": "5 nights"}],
         "expect": {"nonexistent_value": 0, "synonym": 1}},
        {"case": "ellipsis and generic word",
         "context": ["A cheap place to eat in the centre, please."],
         "gold": [{"domain": "restaurant", "slot": "area", "value": "centre"},
                  {"domain": "restaurant", "slot": "pricerange", "value": "cheap"}],
         "predicted": [{"domain": "restaurant", "slot": "area", "value": "..."},
                       {"domain": "restaurant", "slot": "pricerange", "value": "general"}],
         "expect": {"nonexistent_value": 2, "synonym": 0}},
        {"case": "value absent from context",
         "context": ["I'd like some asian food."],
         "gold": [{"domain": "restaurant", "slot": "food", "value": "asian"}],
         "predicted": [{"domain": "restaurant", "slot": "food", "value": "thai"}],
         "expect": {"nonexistent_value": 1, "synonym": 0}},
        {"case": "correct",
         "context": ["Leave at 17:00."],
         "gold": [{"domain": "taxi", "slot": "leave at", "value": "17:00"}],
         "predicted": [{"domain": "taxi", "slot": "leave at", "value": "17:00"}],
         "expect": {"nonexistent_value": 0, "synonym": 0}},
    ])
    write_jsonl(OUT / "exemplars.jsonl", [
        {"input": "USER: I need a cheap hotel in the north.",
         "output": "Domain : ['hotel'] , Slot : ['pricerange', 'area'] , Value : ['cheap', 'north']"},
        {"input": "USER: Book a taxi to the airport.\nSYSTEM: When?\nUSER: Any time is fine.",
         "output": "Domain : ['taxi'] , Slot : ['destination', 'leave at'] , Value : ['the airport', 'NONE']"},
    ])
    write_formats()


MULTIWOZ = {
    "MUL0001.json": {"log": [
        {"text": "I need a cheap hotel in the east.", "metadata": {}},
        {"text": "Sure, for how many nights?", "metadata": {
            "hotel": {"semi": {"pricerange": "cheap", "area": "east", "name": "not mentioned"},
                      "book": {"stay": "", "booked": []}},
            "taxi": {"semi": {"destination": "", "departure": ""}, "book": {"booked": []}}}},
        {"text": "Three nights, from Friday.", "metadata": {}},
        {"text": "Booked.", "metadata": {
            "hotel": {"semi": {"pricerange": "cheap", "area": "east", "name": "not mentioned"},
                      "book": {"stay": "3", "day": "friday", "booked": [{"name": "x"}]}}}},
    ]},
    "MUL0002.json": {"log": [
        {"text": "Caf\u00e9 food in the centre, please.", "metadata": {}},
        {"text": "Here is one.", "metadata": {"restaurant": {"semi": {"food": "caf\u00e9", "area": "centre"},
                                                              "book": {"booked": []}}}},
    ]},
    "MUL0003.json": {"log": []},
}

SGD = [
    {"dialogue_id": "1_00000", "services": ["Restaurants_1"], "turns": [
        {"speaker": "USER", "utterance": "Find me an Italian place in San Jose.", "frames": [
            {"service": "Restaurants_1", "state": {"active_intent": "FindRestaurants",
                                                   "slot_values": {"cuisine": ["Italian"], "city": ["San Jose"]}}}]},
        {"speaker": "SYSTEM", "utterance": "How about Tony's?", "frames": [{"service": "Restaurants_1"}]},
        {"speaker": "USER", "utterance": "Great. Also a cab there.", "frames": [
            {"service": "RideSharing_2", "state": {"active_intent": "GetRide",
                                                   "slot_values": {"destination": ["Tony's", "Tonys"]}}}]},
    ]},
    {"dialogue_id": "1_00001", "turns": "not a list"},
]


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")


def write_formats() -> None:
    write_json(OUT / "multiwoz_sample.json", MULTIWOZ)
    write_json(OUT / "sgd_sample.json", SGD)
    good = {"dialogue_id": "ok-1", "turns": [{"speaker": "user", "text": "Hello there."}],
            "gold": [[{"domain": "general", "slot": "greeting", "value": "hello"}]]}
    lines = [
        json.dumps(good),
        "",
        "{not json",
        json.dumps({"dialogue_id": "bad-speaker", "turns": [{"speaker": "robot", "text": "hi"}]}),
        json.dumps({"dialogue_id": "bad-gold", "turns": [{"speaker": "user", "text": "hi"}], "gold": []}),
        json.dumps({"dialogue_id": "ok-2", "turns": [{"speaker": "user", "text": "\u00bfD\u00f3nde est\u00e1 el hotel? \U0001f3e8"},
                                                      {"speaker": "system", "text": "Aqu\u00ed."}]}, ensure_ascii=False),
    ]
    (OUT / "malformed.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
