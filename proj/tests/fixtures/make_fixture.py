"""Regenerates the fixture corpus, manifest and config (deterministic)."""
import json
import random

rng = random.Random(20240601)
syll = ["ka", "lo", "mi", "ten", "var", "sho", "el", "dun", "ri", "pa", "gor", "ne", "thu", "as", "bel", "quo"]
common = ["the", "and", "of", "to", "a", "my", "you", "I", "is", "in", "that", "me", "not", "with", "it", "his",
          "be", "your", "for", "this", "but", "he", "have", "thou", "so", "what", "will", "our", "by", "her", "no",
          "all", "do", "shall", "lord", "are", "as", "good", "sir", "if"]
lex = common[:]
while len(lex) < 220:
    w = "".join(rng.choice(syll) for _ in range(rng.randint(2, 3)))
    if w not in lex:
        lex.append(w)
names = ["Rome", "Milan", "Antonio"]


def dist(sig_start):
    w = [1.0 / (i + 1) ** 0.9 for i in range(len(lex))]
    for k in range(sig_start, sig_start + 12):
        w[k] += 0.12
    return w


authors = {"Alder": dist(60), "Birch": dist(80), "Cedar": dist(100), "Dunn": dist(120),
           "Eld": dist(140), "Later One": dist(100), "Later Two": dist(62)}
mixed = [a + b for a, b in zip(authors["Alder"], authors["Dunn"])]


def utterance(w):
    n = rng.choice([rng.randint(3, 40)] * 30 + [rng.randint(460, 520)])
    words = rng.choices(lex, weights=w, k=n)
    if rng.random() < 0.1:
        words[rng.randrange(n)] = rng.choice(names)
    text = " ".join(words)
    if rng.random() < 0.15:
        text = text.replace(" you ", " you’ll ", 1)
    if rng.random() < 0.1:
        text = "“" + text + "”"
    return text


def write_play(pid, w, n_utt, fmt):
    utts = [utterance(w) for _ in range(n_utt)]
    if fmt == "xml":
        body = "\n".join(f"<sp><speaker>SPEAKER {i % 3}</speaker><l>{u.replace('&', '&amp;')}</l></sp>"
                         for i, u in enumerate(utts))
        with open(f"corpus/{pid}.xml", "w") as f:
            f.write(f"<play>\n<stage>Enter all.</stage>\n{body}\n</play>\n")
        return f"corpus/{pid}.xml"
    blocks = []
    for u in utts:
        ws = u.split(" ")
        blocks.append("\n".join(" ".join(ws[i:i + 12]) for i in range(0, len(ws), 12)))
    with open(f"corpus/{pid}.txt", "w") as f:
        f.write("\n\n".join(blocks) + "\n")
    return f"corpus/{pid}.txt"


plays = []


def add(pid, title, author, w, n, fmt="plain", status="single", century=None):
    e = {"play_id": pid, "title": title, "author": author, "source": "fixture", "path": write_play(pid, w, n, fmt)}
    if century is not None:
        e["century"] = century
    if status != "single":
        e["authorship_status"] = status
    plays.append(e)


for k in range(3):
    add(f"alder-{k + 1}", f"Alder Play {k + 1}", "Alder", authors["Alder"], 45)
add("alder-short", "Alder Fragment", "Alder", authors["Alder"], 10)
for k in range(3):
    add(f"birch-{k + 1}", f"Birch Play {k + 1}", "Birch", authors["Birch"], 45, "xml")
for k in range(4):
    add(f"cedar-{k + 1}", f"Cedar Play {k + 1}", "Cedar", authors["Cedar"], 45)
for k in range(3):
    add(f"dunn-{k + 1}", f"Dunn Play {k + 1}", "Dunn", authors["Dunn"], 45, "xml" if k == 1 else "plain")
for k in range(2):
    add(f"eld-{k + 1}", f"Eld Play {k + 1}", "Eld", authors["Eld"], 45)
add("shared-1", "A Shared Play", "Alder", mixed, 40, status="co-authored")
add("doubtful-1", "A Doubtful Play", "Dunn", authors["Cedar"], 40, status="disputed")
add("later-1", "Later Play", "Later One", authors["Later One"], 40, "xml", "comparison", 1700)
add("later-2", "Much Later Play", "Later Two", authors["Later Two"], 40, "plain", "comparison", 1800)
with open("manifest.json", "w") as f:
    json.dump({"plays": plays}, f, indent=2)
    f.write("\n")

cfg = {
    "manifest": "manifest.json", "workdir": "work", "seed": 7,
    "filter": {"min_utterances_per_play": 30, "min_plays_per_author": 3},
    "split": {"train_per_play": 12, "val_per_play": 3, "test_in_per_play": 5, "test_out_per_play": 20,
              "disputed_per_play": 15, "timeline_per_play": 15},
    "features": {"mfw": 100},
    "linear": {"epochs": 80, "batch_size": 16},
    "reports": {"top_m": 30, "n_trials": 50, "timeline_targets": ["Cedar", "Alder"]},
}
with open("config.json", "w") as f:
    json.dump(cfg, f, indent=2)
    f.write("\n")

# oracle fixture: 3 authors x 10 samples, plus unlabeled probe texts
small = lex[:40]
small_rng = random.Random(7)
oracle_samples = []
for a, name in enumerate(["Alder", "Birch", "Cedar"]):
    w = [1.0 / (i + 1) for i in range(len(small))]
    for k in range(a * 5, a * 5 + 5):
        w[k] += 0.15
    for i in range(10):
        oracle_samples.append({"sample_id": f"{name.lower()}-p01:u{i:06d}:c000", "play_id": f"{name.lower()}-p01",
                               "author": name, "text": " ".join(small_rng.choices(small, weights=w, k=small_rng.randint(15, 35)))})
probes = [" ".join(small_rng.choices(small, k=small_rng.randint(10, 30))) for _ in range(20)]
with open("oracle_fixture.json", "w") as f:
    json.dump({"samples": oracle_samples, "probes": probes}, f, indent=1)
    f.write("\n")
