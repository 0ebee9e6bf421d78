#!/usr/bin/env python3
"""Regenerate the fixture corpus under tests/fixtures/corpus.

Span offsets are located by anchored substring search (phrase + occurrence),
so the emitted annotation files are consistent with the statute texts by
construction. Output files are canonical; loading and re-serializing them is
byte-identical.
"""

from __future__ import annotations

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from statreason.corpus import serialize_cases, serialize_coref, serialize_spans
from statreason.model import ArgumentLayer, Case, Money, Span, ValueMap
from statreason import records

OUT = REPO / "tests" / "fixtures" / "corpus"

# ---------------------------------------------------------------------------
# Statute texts, grouped into section files.

SECTIONS = {
    "section1.txt": [
        (
            "§1(d)(iv)",
            "(iv) $31,172, plus 36% of the excess over $115,000 if the taxable income"
            " is over $115,000 but not over $250,000;",
        ),
    ],
    "section2.txt": [
        (
            "§2(a)(1)",
            "For purposes of this part, an individual is a surviving spouse if the"
            " requirements of subparagraphs (A) and (B) are met with respect to the"
            " individual and the taxable year.",
        ),
        (
            "§2(a)(1)(A)",
            "(A) a taxpayer spouse died during either of the two years immediately"
            " preceding the taxable year",
        ),
        (
            "§2(a)(1)(B)",
            "(B) the taxpayer maintains a household which is the principal place of"
            " abode of a dependent of the taxpayer for the taxable year.",
        ),
    ],
    "section63.txt": [
        (
            "§63(c)(5)",
            "In the case of an individual with respect to whom a deduction under"
            " section 151 is allowable to another taxpayer for a taxable year"
            " beginning in the calendar year in which the individual's taxable year"
            " begins, the basic standard deduction applicable to such individual for"
            " such individual's taxable year shall not exceed the greater of-",
        ),
        ("§63(c)(5)(A)", "(A) $500, or"),
        ("§63(c)(5)(B)", "(B) the sum of $250 and such individual's earned income."),
    ],
    "section151.txt": [
        (
            "§151(b)",
            "(b) An exemption of the exemption amount for the taxpayer; and an"
            " additional exemption for the spouse of the taxpayer for the taxable"
            " year.",
        ),
        (
            "§151(c)",
            "(c) An exemption of the exemption amount for each dependent of the"
            " taxpayer for the taxable year.",
        ),
    ],
    "section3306.txt": [
        (
            "§3306(a)(1)(B)",
            "(B) on each of some 10 days during the calendar year or during the"
            " preceding calendar year, each day being in a different calendar week,"
            " employed at least one individual in employment for some portion of the"
            " day.",
        ),
        (
            "§3306(c)",
            "(c) For purposes of this chapter, the term employment means any service"
            " performed by an employee for the person employing him.",
        ),
    ],
    "tax.txt": [
        (
            "Tax",
            "The tax imposed on the taxpayer for the taxable year shall be determined"
            " from the taxable income.",
        ),
    ],
}

# Argument layers: name -> mentions as (phrase, occurrence within the text).
LAYERS: dict[str, dict[str, list[tuple[str, int]]]] = {
    "§1(d)(iv)": {
        "Tax": [("$31,172, plus 36% of the excess over $115,000", 1)],
        "Taxinc": [("the taxable income", 1)],
    },
    "§2(a)(1)": {
        "Taxp": [("an individual", 1), ("the individual", 1)],
        "Taxy": [("the taxable year", 1)],
    },
    "§2(a)(1)(A)": {
        "Taxp": [("a taxpayer", 1)],
        "Taxy": [("the taxable year", 1)],
    },
    "§2(a)(1)(B)": {
        "Taxp": [("the taxpayer", 1), ("the taxpayer", 2)],
        "S211": [("a household", 1)],
        "S24A": [("a dependent", 1)],
        "Taxy": [("the taxable year", 1)],
    },
    "§63(c)(5)": {
        "Taxp": [("an individual", 1), ("the individual", 1), ("such individual", 1), ("such individual", 2)],
        "S44B": [("a deduction", 1)],
        "S45": [("another taxpayer", 1)],
        "S46B": [("a taxable year", 1)],
        "S47": [("the calendar year", 1)],
        "Taxy": [("taxable year", 2), ("taxable year", 3)],
        "Bassd": [("the basic standard deduction", 1)],
        "S48": [("the greater", 1)],
    },
    "§63(c)(5)(A)": {},
    "§63(c)(5)(B)": {
        "Taxp": [("such individual", 1)],
        "Grossinc": [("earned income", 1)],
    },
    "§151(b)": {
        "Taxp": [("the taxpayer", 1), ("the taxpayer", 2)],
        "Spouse": [("the spouse", 1)],
        "Taxy": [("the taxable year", 1)],
    },
    "§151(c)": {
        "S24A": [("each dependent", 1)],
        "Taxp": [("the taxpayer", 1)],
        "Taxy": [("the taxable year", 1)],
    },
    "§3306(a)(1)(B)": {
        "Workday": [("some 10 days", 1), ("each day", 1)],
        "Caly": [("the calendar year", 1)],
        "Preccaly": [("the preceding calendar year", 1)],
        "S13A": [("calendar week", 1)],
        "Employee": [("one individual", 1)],
        "Employment": [("employment", 1)],
        "S16": [("some portion of the day", 1)],
    },
    "§3306(c)": {
        "Service": [("any service", 1)],
        "Employee": [("an employee", 1)],
        "Employer": [("the person", 1)],
    },
    "Tax": {
        "Tax": [("The tax", 1)],
        "Taxp": [("the taxpayer", 1)],
        "Taxy": [("the taxable year", 1)],
        "Taxinc": [("the taxable income", 1)],
    },
}

STRUCTURE = """\
% Structure annotations for the fixture corpus. One clause per subsection;
% the final parenthesized group of a term is its argument list.
§1(d)(iv)(Tax, Taxinc).
§2(a)(1)(Taxp, Taxy, S211, S24A) :- §2(a)(1)(A)(Taxp, Taxy) AND §2(a)(1)(B)(Taxp, Taxy, S211, S24A).
§2(a)(1)(A)(Taxp, Taxy).
§2(a)(1)(B)(Taxp, Taxy, S211, S24A).
§3306(a)(1)(B)(Caly, S16, Workday, Employment, Preccaly, Employee, S13A, Employer, Service) :- §3306(c)(Employee, Employer, Service).
§3306(c)(Employee, Employer, Service).
§63(c)(5)(Bassd, Grossinc, S45, Taxp, Taxy, S44B, S46B, S47, S48) :- [§151(b)(Spouse=Taxp, Taxp=S45, Taxy) OR §151(c)(S24A=Taxp, Taxp=S45, Taxy)] AND §63(c)(5)(A)() AND §63(c)(5)(B)(Grossinc, Taxp).
§63(c)(5)(A)().
§63(c)(5)(B)(Grossinc, Taxp).
§151(b)(Spouse, Taxp, Taxy).
§151(c)(S24A, Taxp, Taxy).
Tax(Tax, Taxinc, Taxp, Taxy) :- §1(d)(iv)(Tax, Taxinc).
"""

WORKDAYS = ("Jan 24", "Feb 4", "Mar 3", "Mar 19", "Apr 2", "May 9",
            "Oct 15", "Oct 25", "Nov 8", "Nov 22", "Dec 1", "Dec 3")

TRAIN_CASES = [
    Case(
        "3306(a)(1)(B)-positive",
        "Alice has employed Bob on various occasions during the year 2017: "
        "Jan 24, Feb 4, Mar 3, Mar 19, Apr 2, May 9, Oct 15, Oct 25, Nov 8, "
        "Nov 22, Dec 1, Dec 3.",
        "§3306(a)(1)(B)",
        ValueMap({"Employer": "Alice", "Caly": "2017"}),
        ValueMap(
            {
                "Workday": WORKDAYS,
                "Employee": "Bob",
                "Employment": "has employed",
                "S13A": (4, 5, 9, 11, 13, 19, 41, 43, 45, 47),
                "@truth": 1.0,
            }
        ),
        "train",
    ),
    Case(
        "3306(a)(1)(B)-negative",
        "Alice has employed Bob on 3 days during the year 2017: Jan 24, Feb 4, Mar 3.",
        "§3306(a)(1)(B)",
        ValueMap({"Employer": "Alice", "Caly": "2017"}),
        ValueMap({"@truth": 0.0}),
        "train",
    ),
    Case(
        "tax-case-5",
        "In 2017, Alice's gross income was $326332. Alice and Bob have been "
        "married since Feb 3rd, 2017, and have had the same principal place of "
        "abode since 2015. Alice was born March 2nd, 1950 and Bob was born "
        "March 3rd, 1955. Alice and Bob file separately in 2017. Bob has no "
        "gross income that year. Alice takes the standard deduction.",
        "Tax",
        ValueMap({"Taxy": "2017", "Taxp": "Alice"}),
        ValueMap({"Tax": Money(116066), "@truth": 1.0}),
        "train",
    ),
]

TEST_CASES = [
    Case(
        "63(c)(5)-negative",
        "In 2017, Alice was paid $33200. Alice and Bob have been married since "
        "Feb 3rd, 2017. Bob earned $10 in 2017. Alice and Bob file separate "
        "returns. Alice is not entitled to a deduction for Bob under section 151.",
        "§63(c)(5)",
        ValueMap({"Taxp": "Bob", "Taxy": "2017", "Bassd": Money(500)}),
        ValueMap({"@truth": 0.0}),
        "test",
    ),
    Case(
        "63(c)(5)-positive",
        "In 2017, Bob was paid $3200. Alice and Bob have been married since "
        "Feb 3rd, 2015. Alice is entitled to a deduction for Bob under section "
        "151 for the taxable year 2017.",
        "§63(c)(5)",
        ValueMap({"Taxp": "Bob", "Taxy": "2017"}),
        ValueMap({"@truth": 1.0}),
        "test",
    ),
    Case(
        "2(a)(1)-positive",
        "Alice and Bob got married in 1995. Bob died on March 4th, 2016. Alice "
        "maintains a household which is the principal place of abode of her son "
        "Charlie in 2017.",
        "§2(a)(1)",
        ValueMap({"Taxp": "Alice", "Taxy": "2017"}),
        ValueMap({"@truth": 1.0}),
        "test",
    ),
    Case(
        "2(a)(1)-negative",
        "Alice and Bob got married in 1995. Bob died on March 4th, 1999. Alice "
        "maintains a household in 2017.",
        "§2(a)(1)",
        ValueMap({"Taxp": "Alice", "Taxy": "2017"}),
        ValueMap({"@truth": 0.0}),
        "test",
    ),
    Case(
        "tax-case-4",
        "In 2017, Alice's gross income was $210000. Alice files separately and "
        "takes the standard deduction.",
        "Tax",
        ValueMap({"Taxy": "2017", "Taxp": "Alice"}),
        ValueMap({"Tax": Money(55000), "@truth": 1.0}),
        "test",
    ),
]

SILVER_CASES = [
    Case(
        "1(d)(iv)-silver-1",
        "Alice's taxable income for 2017 is $150000.",
        "§1(d)(iv)",
        ValueMap({"Taxinc": Money(150000)}),
        ValueMap({"Tax": Money(43772), "@truth": 1.0}),
        "silver",
    ),
    Case(
        "1(d)(iv)-silver-2",
        "Bob's taxable income for 2017 is $120000.",
        "§1(d)(iv)",
        ValueMap({"Taxinc": Money(120000)}),
        ValueMap({"Tax": Money(32972), "@truth": 1.0}),
        "silver",
    ),
]


def find_span(text: str, phrase: str, occurrence: int) -> Span:
    pos = -1
    for _ in range(occurrence):
        pos = text.find(phrase, pos + 1)
        if pos < 0:
            raise SystemExit(f"phrase {phrase!r} (occurrence {occurrence}) not found")
    return Span(pos, pos + len(phrase))


def build_layer(sid: str, text: str) -> ArgumentLayer:
    mentions = []
    for name, places in LAYERS[sid].items():
        for phrase, occ in places:
            span = find_span(text, phrase, occ)
            mentions.append((span, name))
    mentions.sort(key=lambda m: m[0].start)
    spans = tuple(m[0] for m in mentions)
    names, clusters = [], []
    for i, (_, name) in enumerate(mentions):
        if name in names:
            clusters[names.index(name)].append(i)
        else:
            names.append(name)
            clusters.append([i])
    return ArgumentLayer(sid, spans, tuple(tuple(c) for c in clusters), tuple(names))


def main() -> None:
    (OUT / "statutes").mkdir(parents=True, exist_ok=True)
    (OUT / "cases").mkdir(exist_ok=True)
    (OUT / "silver").mkdir(exist_ok=True)

    offsets_lines = []
    layers = []
    for fname, subsections in SECTIONS.items():
        pieces = []
        cursor = 0
        for sid, text in subsections:
            if pieces:
                pieces.append("\n\n")
                cursor += 2
            offsets_lines.append(
                f"{sid} file={records.write_text(fname)} start={cursor} end={cursor + len(text)}"
            )
            pieces.append(text)
            cursor += len(text)
            layers.append(build_layer(sid, text))
        (OUT / "statutes" / fname).write_text("".join(pieces) + "\n", encoding="utf-8")
    (OUT / "statutes" / "offsets.txt").write_text("\n".join(offsets_lines) + "\n", encoding="utf-8")

    (OUT / "spans.txt").write_text(serialize_spans(layers), encoding="utf-8")
    (OUT / "coref.txt").write_text(serialize_coref(layers), encoding="utf-8")
    (OUT / "structure.txt").write_text(STRUCTURE, encoding="utf-8")
    (OUT / "cases" / "train.cases").write_text(serialize_cases(TRAIN_CASES), encoding="utf-8")
    (OUT / "cases" / "test.cases").write_text(serialize_cases(TEST_CASES), encoding="utf-8")
    (OUT / "silver" / "silver.cases").write_text(serialize_cases(SILVER_CASES), encoding="utf-8")
    (OUT / "manifest.txt").write_text(
        "statutes=statutes\nspans=spans.txt\ncoref=coref.txt\nstructure=structure.txt\n"
        "cases=cases\nsilver=silver\n",
        encoding="utf-8",
    )
    print(f"fixture corpus written to {OUT}")


if __name__ == "__main__":
    main()
