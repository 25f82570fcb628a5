"""
Scoring generated explanations with BLEU and ROUGE-L
====================================================

BLEU here is the classic corpus score: clipped n-gram counts pooled over
all pairs, geometric mean over orders 1..n, brevity penalty from the
closest reference length, no smoothing, reported on a 0..100 scale.
ROUGE-L is the sentence-level LCS F measure, best reference per pair,
averaged over the corpus on a 0..1 scale.
"""

from artcontext import EvalPair, bleu, evaluate_corpus, rouge_l, tokenize

# ---- a small corpus of three pairs ----

PAIRS = [
    EvalPair(
        "summer",
        "The panel shows the grain harvest beside a village church in summer.",
        ["The panel shows the grain harvest near a village church at midsummer."],
    ),
    EvalPair(
        "gleaners",
        "Three peasant women gather leftover grain in a harvested field.",
        [
            "Three peasant women gather stray grain left in a harvested field.",
            "The painting shows women gleaning grain after the harvest.",
        ],
    ),
    EvalPair(
        "sunrise",
        "The harbor dissolves in morning haze under an orange sun.",
        ["The harbor dissolves in morning haze under an orange sun."],
    ),
]

report = evaluate_corpus(PAIRS)
print(report.render())

print("\nper pair:")
for entry in report.per_pair:
    print(f"  {entry.id:<9} BLEU-4 {entry.bleu[4]:6.2f}   ROUGE-L {entry.rouge_l:.4f}")

# The identical pair scores the ceiling on both metrics.
assert report.per_pair[2].bleu[4] == 100.0
assert report.per_pair[2].rouge_l == 1.0

# ---- why the counts are clipped ----
# A degenerate candidate repeats one common word. Plain precision would be
# 7/7; clipping caps each n-gram by its highest count in any reference, and
# "the" appears at most twice there, so the score is 2/7.

degenerate = EvalPair(
    "clip", "the the the the the the the", ["the cat is on the mat"]
)
score = bleu([degenerate], max_n=1)[1]
print(f"\nclipped unigram BLEU for a degenerate candidate: {score:.4f} (= 100 * 2/7)")

# ---- the brevity penalty ----
# A two-word candidate against a six-word reference has perfect clipped
# precision but gets multiplied by exp(1 - 6/2).

short = EvalPair("short", "grain harvest", ["grain harvest beside a village church"])
print(f"short candidate BLEU-1: {bleu([short], max_n=1)[1]:.4f}")

# ---- ROUGE-L counts subsequences, not substrings ----
# "police kill" vs "police killed": the LCS is just "police", one token out
# of two on each side, so precision and recall are both 1/2 and F is 0.5.

print(f"rouge_l('police kill', 'police killed') = {rouge_l('police kill', ['police killed'])}")

# Tokenization lowercases and strips punctuation from token edges, so
# surface differences do not leak into the scores.
print(f"tokenize('The Harvest, 1607.') = {tokenize('The Harvest, 1607.')}")
