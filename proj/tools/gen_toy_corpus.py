#!/usr/bin/env python3
"""Generate the bundled toy corpus: question/answer posts with token-level
annotations (lemma, UPOS, NER, dependency head and relation).

Usage: gen_toy_corpus.py OUT_DIR [--samples N] [--harmful N] [--seed S]
"""

import argparse
import csv
import json
import random
from pathlib import Path

# Token spec: (form, lemma, upos, head index within the sentence or None for
# root, deprel, ner tag).

NAMES = [("Mary", "Jane"), ("John",), ("Alex",), ("Tom", "Baker"), ("Sara",), ("Kevin",)]
CITIES = [("Paris",), ("New", "York"), ("London",), ("Tokyo",), ("San", "Diego")]
ORGS = [("Google",), ("Nasa",), ("Red", "Cross")]

NICE_NOUNS = [("dogs", "dog"), ("movies", "movie"), ("songs", "song"), ("books", "book"),
              ("games", "game"), ("pizza", "pizza"), ("cats", "cat"), ("shows", "show")]
NICE_ADJ = ["great", "funny", "nice", "cool", "happy", "sweet", "awesome", "quiet", "busy"]
NICE_ADJ_SUP = [("best", "good"), ("coolest", "cool"), ("nicest", "nice")]
BAD_ADJ = ["ugly", "stupid", "fat", "pathetic", "worthless", "disgusting"]
BAD_NOUN = [("loser", "loser"), ("idiot", "idiot"), ("freak", "freak"), ("slut", "slut"),
            ("moron", "moron")]
PAST_VERBS = [("went", "go"), ("moved", "move"), ("traveled", "travel")]
LIKE_VERBS = [("like", "like"), ("love", "love"), ("enjoy", "enjoy")]


def entity(parts, kind, head, deprel):
    """Multi-word entity: first token carries the relation, the rest attach flat."""
    toks = [(parts[0], parts[0].lower(), "PROPN", head, deprel, "B-" + kind)]
    for p in parts[1:]:
        toks.append((p, p.lower(), "PROPN", "E0", "flat", "I-" + kind))
    return toks


def assemble(pieces):
    """Resolves symbolic heads. Each piece is a list of tokens whose head is an
    int (sentence position), None (root), or "E0" (first token of the piece)."""
    out = []
    for piece in pieces:
        start = len(out)
        for form, lemma, upos, head, deprel, ner in piece:
            if head == "E0":
                head = start
            out.append([form, lemma, upos, head, deprel, ner])
    return out


def tok(form, lemma, upos, head, deprel, ner="O"):
    return [(form, lemma, upos, head, deprel, ner)]


# Question templates -------------------------------------------------------

def q_think_about(r):
    name = r.choice(NAMES)
    # what(0) do(1) you(2) think(3) about(4) NAME(5..) ?
    pieces = [tok("what", "what", "PRON", 3, "obj"), tok("do", "do", "AUX", 3, "aux"),
              tok("you", "you", "PRON", 3, "nsubj"), tok("think", "think", "VERB", None, "root"),
              tok("about", "about", "ADP", 5, "case"), entity(name, "PERSON", 3, "obl")]
    pieces.append(tok("?", "?", "PUNCT", 3, "punct"))
    return assemble(pieces)


def q_like(r):
    verb = r.choice(LIKE_VERBS)
    adj = r.choice(NICE_ADJ)
    noun = r.choice(NICE_NOUNS)
    # do(0) you(1) like(2) ADJ(3) NOUN(4) ?(5)
    return assemble([tok("do", "do", "AUX", 2, "aux"), tok("you", "you", "PRON", 2, "nsubj"),
                     tok(verb[0], verb[1], "VERB", None, "root"), tok(adj, adj, "ADJ", 4, "amod"),
                     tok(noun[0], noun[1], "NOUN", 2, "obj"), tok("?", "?", "PUNCT", 2, "punct")])


def q_why(r):
    adj = r.choice(NICE_ADJ + BAD_ADJ[:2])
    # why(0) are(1) you(2) so(3) ADJ(4) ?(5)
    return assemble([tok("why", "why", "ADV", 4, "advmod"), tok("are", "be", "AUX", 4, "cop"),
                     tok("you", "you", "PRON", 4, "nsubj"), tok("so", "so", "ADV", 4, "advmod"),
                     tok(adj, adj, "ADJ", None, "root"), tok("?", "?", "PUNCT", 4, "punct")])


def q_been(r):
    city = r.choice(CITIES)
    # have(0) you(1) ever(2) been(3) to(4) CITY(5..) ?
    return assemble([tok("have", "have", "AUX", 3, "aux"), tok("you", "you", "PRON", 3, "nsubj"),
                     tok("ever", "ever", "ADV", 3, "advmod"), tok("been", "be", "VERB", None, "root"),
                     tok("to", "to", "ADP", 5, "case"), entity(city, "GPE", 3, "obl"),
                     tok("?", "?", "PUNCT", 3, "punct")])


def q_work(r):
    org = r.choice(ORGS)
    # would(0) you(1) work(2) for(3) ORG(4..) ?
    return assemble([tok("would", "would", "AUX", 2, "aux"), tok("you", "you", "PRON", 2, "nsubj"),
                     tok("work", "work", "VERB", None, "root"), tok("for", "for", "ADP", 4, "case"),
                     entity(org, "ORG", 2, "obl"), tok("?", "?", "PUNCT", 2, "punct")])


QUESTIONS = [q_think_about, q_like, q_why, q_been, q_work]

# Answer templates ---------------------------------------------------------

def a_love(r):
    verb = r.choice(LIKE_VERBS)
    noun = r.choice(NICE_NOUNS)
    # i(0) VERB(1) NOUN(2) .(3)
    return assemble([tok(r.choice(["i", "I"]), "I", "PRON", 1, "nsubj"),
                     tok(verb[0], verb[1], "VERB", None, "root"), tok(noun[0], noun[1], "NOUN", 1, "obj"),
                     tok(".", ".", "PUNCT", 1, "punct")])


def a_friend(r):
    name = r.choice(NAMES)
    sup = r.choice(NICE_ADJ_SUP)
    n = len(name)
    # NAME(0..n-1) is(n) my(n+1) SUP(n+2) friend(n+3) .(n+4)
    root = n + 3
    return assemble([entity(name, "PERSON", root, "nsubj"), tok("is", "be", "AUX", root, "cop"),
                     tok("my", "my", "PRON", root, "nmod:poss"), tok(sup[0], sup[1], "ADJ", root, "amod"),
                     tok("friend", "friend", "NOUN", None, "root"), tok(".", ".", "PUNCT", root, "punct")])


def a_went(r):
    verb = r.choice(PAST_VERBS)
    city = r.choice(CITIES)
    n = len(city)
    # i(0) VERB(1) to(2) CITY(3..) last(3+n) summer(4+n) !(5+n)
    return assemble([tok("i", "I", "PRON", 1, "nsubj"), tok(verb[0], verb[1], "VERB", None, "root"),
                     tok("to", "to", "ADP", 3, "case"), entity(city, "GPE", 1, "obl"),
                     tok("last", "last", "ADJ", 4 + n, "amod"), tok("summer", "summer", "NOUN", 1, "obl:tmod"),
                     tok(r.choice(["!", "."]), "!", "PUNCT", 1, "punct")])


def a_was(r, adjs=NICE_ADJ):
    noun = r.choice(NICE_NOUNS)
    adj = r.choice(adjs)
    # the(0) NOUN(1) was(2) really(3) ADJ(4) .(5)
    return assemble([tok(r.choice(["the", "The"]), "the", "DET", 1, "det"), tok(noun[0], noun[1], "NOUN", 4, "nsubj"),
                     tok("was", "be", "AUX", 4, "cop"), tok("really", "really", "ADV", 4, "advmod"),
                     tok(adj, adj, "ADJ", None, "root"), tok(".", ".", "PUNCT", 4, "punct")])


def a_not(r):
    verb = r.choice(LIKE_VERBS)
    noun = r.choice(NICE_NOUNS)
    # i(0) do(1) n't(2) VERB(3) NOUN(4) ,(5) sorry(6)
    return assemble([tok("i", "I", "PRON", 3, "nsubj"), tok("do", "do", "AUX", 3, "aux"),
                     tok("n't", "not", "PART", 3, "advmod"), tok(verb[0], verb[1], "VERB", None, "root"),
                     tok(noun[0], noun[1], "NOUN", 3, "obj"), tok(",", ",", "PUNCT", 6, "punct"),
                     tok("sorry", "sorry", "ADJ", 3, "parataxis")])


def h_you_are(r):
    adj = r.choice(BAD_ADJ)
    # you(0) are(1) so(2) ADJ(3) and(4) nobody(5) likes(6) you(7) .(8)
    return assemble([tok("you", "you", "PRON", 3, "nsubj"), tok("are", "be", "AUX", 3, "cop"),
                     tok("so", "so", "ADV", 3, "advmod"), tok(adj, adj, "ADJ", None, "root"),
                     tok("and", "and", "CCONJ", 6, "cc"), tok("nobody", "nobody", "PRON", 6, "nsubj"),
                     tok("likes", "like", "VERB", 3, "conj"), tok("you", "you", "PRON", 6, "obj"),
                     tok(".", ".", "PUNCT", 3, "punct")])


def h_shut_up(r):
    adj = r.choice(BAD_ADJ)
    noun = r.choice(BAD_NOUN)
    # shut(0) up(1) ,(2) you(3) ADJ(4) NOUN(5) !(6)
    return assemble([tok("shut", "shut", "VERB", None, "root"), tok("up", "up", "ADP", 0, "compound:prt"),
                     tok(",", ",", "PUNCT", 5, "punct"), tok("you", "you", "PRON", 5, "det"),
                     tok(adj, adj, "ADJ", 5, "amod"), tok(noun[0], noun[1], "NOUN", 0, "vocative"),
                     tok("!", "!", "PUNCT", 0, "punct")])


def h_name_is(r):
    name = r.choice(NAMES)
    adj = r.choice(BAD_ADJ)
    noun = r.choice(BAD_NOUN)
    n = len(name)
    root = n + 3
    # NAME is a ADJ NOUN .
    return assemble([entity(name, "PERSON", root, "nsubj"), tok("is", "be", "AUX", root, "cop"),
                     tok("a", "a", "DET", root, "det"), tok(adj, adj, "ADJ", root, "amod"),
                     tok(noun[0], noun[1], "NOUN", None, "root"), tok(".", ".", "PUNCT", root, "punct")])


def h_go_away(r):
    noun = r.choice(BAD_NOUN)
    # go(0) away(1) ,(2) NOUN(3) !(4)
    return assemble([tok("go", "go", "VERB", None, "root"), tok("away", "away", "ADV", 0, "advmod"),
                     tok(",", ",", "PUNCT", 3, "punct"), tok(noun[0], noun[1], "NOUN", 0, "vocative"),
                     tok("!", "!", "PUNCT", 0, "punct")])


NICE_ANSWERS = [a_love, a_friend, a_went, a_was, a_not]
HARMFUL_ANSWERS = [h_you_are, h_shut_up, h_name_is, h_go_away]

NO_SPACE_BEFORE = {".", ",", "!", "?", "n't"}


def render(tokens):
    text = ""
    for t in tokens:
        form = t[0]
        if text and form not in NO_SPACE_BEFORE:
            text += " "
        text += form
    return text


def make_sample(r, harmful):
    question = r.choice(QUESTIONS)(r) if r.random() < 0.9 else []
    if harmful:
        answer = r.choice(HARMFUL_ANSWERS)(r)
    elif r.random() < 0.08:
        # Rude words in a harmless context keep the task from being trivial.
        answer = a_was(r, BAD_ADJ[:2])
    else:
        answer = r.choice(NICE_ANSWERS)(r)
    return question, answer


def write_part(out, name, tokens):
    out.write(f"# part = {name}\n")
    for i, (form, lemma, upos, head, deprel, ner) in enumerate(tokens, start=1):
        h = 0 if head is None else head + 1
        out.write(f"{i}\t{form}\t{lemma}\t{upos}\t_\t_\t{h}\t{deprel}\t_\t_\t{ner}\n")
    out.write("\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--harmful", type=int, default=14)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    r = random.Random(args.seed)
    labels = [1] * args.harmful + [0] * (args.samples - args.harmful)
    r.shuffle(labels)
    args.out_dir.mkdir(parents=True, exist_ok=True)

    with open(args.out_dir / "samples.csv", "w", newline="") as sf, \
            open(args.out_dir / "annotations.conllu", "w") as af:
        w = csv.writer(sf, lineterminator="\n")
        w.writerow(["id", "question", "answer", "label"])
        af.write("# global.columns = ID FORM LEMMA UPOS XPOS FEATS HEAD DEPREL DEPS MISC NER\n")
        for i, y in enumerate(labels):
            sid = f"t{i:04d}"
            question, answer = make_sample(r, y == 1)
            w.writerow([sid, render(question), render(answer), y])
            af.write(f"# sample_id = {sid}\n")
            if question:
                write_part(af, "question", question)
            write_part(af, "answer", answer)

    nn = {"epochs": 10, "batch_size": 16}
    cnn = dict(nn, max_len=32, embed_dim=16, feature_maps=16, dense_units=32)
    config = {
        "samples": "samples.csv",
        "annotations": "annotations.conllu",
        "variants": "all",
        "classifiers": [
            "NB", "KNN", "SVM", "LR",
            {"family": "RF", "params": {"trees": 100}},
            {"family": "MLP", "params": dict(nn, hidden_units=64)},
            {"family": "CNN1L", "params": cnn},
            {"family": "CNN2L", "params": cnn},
        ],
        "k": 5,
        "seed": 2021,
        "smote": "both",
        "jobs": 1,
        "format": "both",
    }
    with open(args.out_dir / "config.json", "w") as cf:
        json.dump(config, cf, indent=2)
        cf.write("\n")


if __name__ == "__main__":
    main()
