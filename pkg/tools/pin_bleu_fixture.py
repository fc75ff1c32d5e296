#!/usr/bin/env python3
"""Pin the BLEU fixture's expected value with the reference scorer.

Run once when the fixture sentences change; requires the `sacrebleu`
package. The committed fixture carries the reference tool's corpus score
(13a tokenization, mixed case, exponential smoothing, single reference)
and our canonical signature string, and the test suite asserts our
implementation agrees to 1e-4.
"""

import json
import sys
from pathlib import Path

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "bleu" / "fixture.json"

HYPOTHESES = [
    "You can renew your license online or at any DMV office.",
    "No, you must renew before the expiry date to avoid a late fee.",
    "A vision test is required for every renewal.",
    "Yes, online renewals also require a recent vision test.",
    "The modern pizza was invented in Naples, Italy.",
    "Soak dried beans overnight in cold water before cooking.",
    "You may submit results from your own eye doctor.",
    "Renewal costs twenty dollars for a standard license.",
    "Veterans can request a fee waiver at the service desk.",
    "The office is open from nine to five on weekdays.",
    "Sure, bring two proofs of residency and your old card.",
    "Your appointment can be rescheduled online at no cost.",
    "Replacement cards arrive within ten business days.",
    "No, the written exam is only required for new drivers.",
    "Commercial licenses follow a different renewal schedule.",
    "You will receive a reminder notice about sixty days ahead.",
    "Yes, you can pay the fee with a credit card.",
    "The late penalty doubles after the second month.",
    "Organ donor status can be updated during any renewal.",
    "Please keep the paper receipt until the new card arrives.",
]

REFERENCES = [
    "You can renew the license online or at a DMV office.",
    "No, renew before the expiry date to avoid a late fee.",
    "A vision test is required for every renewal.",
    "Yes, online renewals require a recent vision test on file.",
    "Modern pizza was invented in Naples.",
    "Soak dried beans overnight in cold water.",
    "You may submit results from your own eye doctor instead.",
    "A standard license renewal costs twenty dollars.",
    "Veterans may request a fee waiver at the desk.",
    "The office opens at nine and closes at five on weekdays.",
    "Bring two proofs of residency and the old card.",
    "Appointments can be rescheduled online for free.",
    "A replacement card arrives within ten business days.",
    "No, only new drivers take the written exam.",
    "Commercial licenses are renewed on a different schedule.",
    "A reminder notice is mailed about sixty days in advance.",
    "Yes, the fee can be paid by credit card.",
    "After the second month the late penalty doubles.",
    "You can update organ donor status during any renewal.",
    "Keep the paper receipt until your new card arrives.",
]


def main():
    import sacrebleu

    result = sacrebleu.corpus_bleu(HYPOTHESES, [REFERENCES])
    fixture = {
        "hypotheses": HYPOTHESES,
        "references": REFERENCES,
        "expected_bleu": result.score,
        "signature": "nrefs:1|case:mixed|eff:no|tok:13a|smooth:exp|ngram:4",
        "pinned_by": f"sacrebleu {getattr(sacrebleu, '__version__', sacrebleu.VERSION)}",
    }
    FIXTURE.parent.mkdir(parents=True, exist_ok=True)
    with open(FIXTURE, "w", encoding="utf-8", newline="\n") as f:
        json.dump(fixture, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
    print(f"pinned expected_bleu={result.score!r} -> {FIXTURE}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
