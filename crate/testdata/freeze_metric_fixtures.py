"""Recomputes metric_fixtures.json and eval_expected.json from first principles.

Run from the repository root: python3 testdata/freeze_metric_fixtures.py
Reads only the shipped data files and the stop-word list; shares no code with
the Rust implementation.
"""
import json
import math
import re
from collections import Counter

ROOT = "crates/core"

stop_src = open(f"{ROOT}/src/text.rs").read()
block = stop_src[stop_src.index("STOP_WORDS: &[&str] = &["):]
block = block[: block.index("];")]
STOP = set(re.findall(r'"([a-z]+)"', block))

VALENCE = {}
for line in open(f"{ROOT}/data/sentiment.tsv"):
    line = line.strip()
    if line and not line.startswith("#"):
        w, v = line.split("\t")
        VALENCE[w] = float(v)

ACKS = [l.strip() for l in open(f"{ROOT}/data/acknowledgment.txt")
        if l.strip() and not l.startswith("#")]


def words(text):
    return [w for w in re.split(r"[^0-9a-zA-Z]+", text.lower()) if w]


def content(text):
    return [w for w in words(text) if len(w) > 1 and w not in STOP]


def ari(text):
    chars = sum(ch.isalnum() for ch in text)
    n_words = len(text.split())
    sentences = max(1, sum(1 for s in re.split(r"[.?!]", text) if any(c.isalnum() for c in s)))
    return 4.71 * chars / n_words + 0.5 * n_words / sentences - 21.43


def relevance(a, b):
    ta, tb = content(a), content(b)
    if not ta or not tb:
        return 1.0 if " ".join(words(a)) == " ".join(words(b)) else 0.0
    df = Counter(set(ta)) + Counter(set(tb))
    idf = {t: math.log(3 / (1 + d)) + 1 for t, d in df.items()}
    va = {t: c * idf[t] for t, c in Counter(ta).items()}
    vb = {t: c * idf[t] for t, c in Counter(tb).items()}
    dot = sum(va[t] * vb.get(t, 0.0) for t in va)
    na = math.sqrt(sum(x * x for x in va.values()))
    nb = math.sqrt(sum(x * x for x in vb.values()))
    return min(1.0, max(0.0, dot / (na * nb)))


def sentiment(text):
    ws = words(text)
    vals = []
    for i, w in enumerate(ws):
        if w in VALENCE:
            neg = any(p in ("not", "no", "never") for p in ws[max(0, i - 2):i])
            vals.append(-VALENCE[w] if neg else VALENCE[w])
    return max(-1.0, min(1.0, sum(vals) / len(vals))) if vals else 0.0


def count_phrase(ws, phrase):
    n, i = 0, 0
    while i + len(phrase) <= len(ws):
        if ws[i:i + len(phrase)] == phrase:
            n += 1
            i += len(phrase)
        else:
            i += 1
    return n


def empathy(student, response):
    ws = words(response)
    hits = sum(count_phrase(ws, words(p)) for p in ACKS)
    ack = min(1.0, hits / 2)
    comfort = max(0.0, sentiment(response)) if sentiment(student) < -0.1 else 0.5
    return ack, hits, comfort, 0.5 * ack + 0.5 * comfort


def engagement(response):
    n = len(response.split())
    q = response.count("?")
    return n, q, 0.7 * min(n / 120, 1) + 0.3 * min(q / 2, 1)


ARI_TEXTS = [
    "The cat sat.",
    "I run. You jump.",
    "A variable stores a value.",
    "Recursion solves a problem by reducing it to smaller instances of itself.",
    "Why? Because the loop never terminates! Check the condition.",
    "Hash tables give average constant-time lookups; collisions degrade this.",
    "Ok",
    "Sorting algorithms differ in stability, memory use, and worst-case behaviour. Merge sort is stable. Quicksort usually is not.",
    "Use 3 spaces, not 2... Then re-run the tests!!",
    "Big-O notation describes how running time grows with input size n",
]

RELEVANCE_PAIRS = [
    ["What is a variable?", "A variable is a named storage location that holds a value."],
    ["How do I sort a list in Python?", "Call sorted on the list, or use the list sort method to sort in place."],
    ["Explain recursion", "Recursion means a function calls itself on a smaller input until a base case stops it."],
    ["What jobs use SQL?", "Data analysts and backend developers write SQL queries every day."],
    ["stack stack queue", "queue stack"],
]

EMPATHY_PAIRS = [
    ["I'm frustrated and lost with recursion.",
     "I understand, it's okay to feel that way. Let's work through it together, you are capable."],
    ["What is a variable?", "A variable stores a value."],
    ["I feel anxious and stressed about the exam.",
     "That sounds hard. You're not alone, and you are not hopeless."],
    ["I am so sad and tired.", "Sorry to hear that. It is okay to rest."],
    ["This is great, thanks!", "I understand. I hear you. That makes sense."],
]

ENGAGEMENT_TEXTS = [
    "",
    "What do you think? Why?",
    " ".join(["word"] * 120) + "? ?",
    "Try it and tell me what happens next?",
    " ".join(["step"] * 60),
]

out = {
    "ari": [{"text": t, "ari": ari(t)} for t in ARI_TEXTS],
    "relevance": [{"question": q, "answer": a, "relevance": relevance(q, a)} for q, a in RELEVANCE_PAIRS],
    "empathy": [],
    "engagement": [],
}
for s, r in EMPATHY_PAIRS:
    ack, hits, comfort, score = empathy(s, r)
    out["empathy"].append({"student": s, "response": r, "ack_hits": hits,
                           "comfort": comfort, "empathy": score})
for t in ENGAGEMENT_TEXTS:
    n, q, score = engagement(t)
    out["engagement"].append({"response": t, "words": n, "questions": q, "engagement": score})

with open("testdata/metric_fixtures.json", "w") as f:
    json.dump(out, f, indent=2)
    f.write("\n")


def pearson(xs, ys):
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    return sxy / math.sqrt(sxx * syy)


pairs = [json.loads(l) for l in open("testdata/eval_fixture.jsonl") if l.strip()]
rubric = {r["line"]: r for r in (json.loads(l) for l in open("testdata/eval_rubric.jsonl") if l.strip())}
rows = []
for line, p in enumerate(pairs, 1):
    a = ari(p["answer"])
    rows.append({
        "line": line,
        "bloom": p["bloom"],
        "accuracy": relevance(p["answer"], p["reference"]) if p.get("reference") else None,
        "fluency_ari": a,
        "fluency_norm": min(1.0, max(0.0, (a + 6) / 26)),
        "empathy": empathy(p["question"], p["answer"])[3],
        "engagement": engagement(p["answer"])[2],
        "relevance": relevance(p["question"], p["answer"]),
    })
levels = []
for b in sorted({r["bloom"] for r in rows}):
    g = [r for r in rows if r["bloom"] == b]
    acc = [r["accuracy"] for r in g if r["accuracy"] is not None]
    lv = {"bloom": b, "count": len(g), "accuracy": sum(acc) / len(acc) if acc else None,
          "accuracy_count": len(acc)}
    for k in ["fluency_ari", "fluency_norm", "empathy", "engagement", "relevance"]:
        lv[k] = sum(r[k] for r in g) / len(g)
    levels.append(lv)
corr = {}
for dim in ["empathy", "relevance"]:
    xs = [r[dim] for r in rows]
    ys = [rubric[r["line"]][dim] for r in rows]
    corr[dim] = pearson(xs, ys)

with open("testdata/eval_expected.json", "w") as f:
    json.dump({"pairs": rows, "levels": levels, "correlations": corr}, f, indent=2)
    f.write("\n")
