"""The three answer metrics, side by side.

String accuracy is containment after normalization: the gold answer
must appear inside the prediction once case, punctuation, and spacing
are stripped away. ROUGE gives partial credit for token overlap, which
suits free-form answers that paraphrase the gold text. The model judge
handles the cases both of those miss, such as "the fourth planet"
versus "Mars"; here it runs on a scripted backend so the demo stays
offline.

Run from the repository root:

    python3 demos/04_metrics.py
"""

from __future__ import annotations

import json

from webgather import ScriptedModelBackend, llm_judge, rouge, string_accuracy

PAIRS = [
    ("Titan was discovered by Christiaan Huygens.", "Christiaan Huygens"),
    ("It was discovered by HUYGENS, Christiaan!", "Christiaan Huygens"),
    ("Galileo Galilei discovered it.", "Christiaan Huygens"),
    ("the fourth planet from the sun", "Mars"),
]

print("string accuracy (normalized containment):")
for predicted, gold in PAIRS:
    verdict = string_accuracy(predicted, gold)
    print(f"  {str(verdict):5}  gold={gold!r}  predicted={predicted!r}")

print("\nrouge (partial credit for token overlap):")
for predicted, gold in PAIRS[:3]:
    scores = rouge(predicted, gold)
    print(f"  r1={scores.rouge1_f:.4f} r2={scores.rouge2_f:.4f}"
          f" rL={scores.rougeL_f:.4f}  gold={gold!r}  predicted={predicted!r}")

# The judge sees question, prediction, and gold, and must answer with a
# JSON decision of TRUE or FALSE. Paraphrases that containment misses
# can still be ruled correct.
question = "Which planet is fourth from the sun?"
predicted = "the fourth planet from the sun, also called the red planet"
gold = "Mars"

backend = ScriptedModelBackend([
    json.dumps({"Decision": "TRUE",
                "Explanation": "The red planet fourth from the sun is Mars."}),
])
verdict = llm_judge(question, predicted, gold, backend=backend)

print("\nmodel judge on a paraphrase:")
print(f"  question:  {question}")
print(f"  predicted: {predicted}")
print(f"  gold:      {gold}")
print(f"  string accuracy says {string_accuracy(predicted, gold)},"
      f" the judge says {verdict.decision} ({verdict.explanation})")
